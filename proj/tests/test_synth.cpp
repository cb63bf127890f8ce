#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pelp/synth.hpp"

using namespace pelp;
using namespace pelp::synth;

namespace {

TopicOptions small_opts(uint64_t seed) {
  TopicOptions opt;
  opt.vocab = 60;
  opt.tokens = 4000;
  opt.topics = 6;
  opt.segment_len = 10;
  opt.leak = 0.1;
  opt.seed = seed;
  return opt;
}

size_t token_count(const std::vector<std::vector<std::string>>& lines) {
  size_t n = 0;
  for (const auto& l : lines) n += l.size();
  return n;
}

}  // namespace

TEST_CASE("topic corpus shape and determinism") {
  TopicOptions opt = small_opts(5);
  auto a = topic_corpus(opt);
  auto b = topic_corpus(opt);
  CHECK(a == b);

  // whole segments only: floor(tokens / segment_len) of them
  CHECK(a.size() == opt.tokens / size_t(opt.segment_len));
  CHECK(token_count(a) == a.size() * size_t(opt.segment_len));
  for (const auto& seg : a) CHECK(seg.size() == size_t(opt.segment_len));

  opt.seed = 6;
  CHECK(topic_corpus(opt) != a);
}

TEST_CASE("topic corpus words stay inside the vocabulary") {
  TopicOptions opt = small_opts(7);
  std::set<std::string> legal;
  for (size_t i = 0; i < opt.vocab; ++i) legal.insert(word_name(opt, i));
  for (const auto& seg : topic_corpus(opt))
    for (const auto& w : seg) CHECK(legal.count(w) == 1);
}

TEST_CASE("topic assignment is interleaved") {
  CHECK(topic_of_word(0, 6) == 0);
  CHECK(topic_of_word(5, 6) == 5);
  CHECK(topic_of_word(6, 6) == 0);
  CHECK(topic_of_word(13, 6) == 1);
}

TEST_CASE("segments are topic-coherent up to the leak rate") {
  TopicOptions opt = small_opts(9);
  opt.leak = 0.05;
  auto lines = topic_corpus(opt);
  // name -> index for topic lookup
  std::map<std::string, size_t> idx;
  for (size_t i = 0; i < opt.vocab; ++i) idx[word_name(opt, i)] = i;

  size_t majority_hits = 0, total = 0;
  for (const auto& seg : lines) {
    std::map<int, size_t> votes;
    for (const auto& w : seg) ++votes[topic_of_word(idx.at(w), opt.topics)];
    size_t best = 0;
    for (const auto& [t, c] : votes) best = std::max(best, c);
    majority_hits += best;
    total += seg.size();
  }
  // with 5% leak the majority topic should cover ~95% of tokens
  CHECK(double(majority_hits) / double(total) > 0.85);
}

TEST_CASE("mirrored bilingual is an exact relabeling") {
  TopicOptions opt = small_opts(11);
  BilingualCorpus bc = mirrored_bilingual(opt, "A", "B");
  CHECK(bc.label_a == "A");
  CHECK(bc.label_b == "B");
  REQUIRE(bc.lines.size() % 2 == 0);

  // pairs cover the vocabulary, prefixed per language
  CHECK(bc.pairs.size() == opt.vocab);
  std::map<std::string, std::string> dict(bc.pairs.begin(), bc.pairs.end());
  for (const auto& [a, b] : bc.pairs) {
    CHECK(a.rfind("A_", 0) == 0);
    CHECK(b.rfind("B_", 0) == 0);
    CHECK(a.substr(2) == b.substr(2));
  }

  // lines interleave: each A segment is followed by its B translation
  for (size_t i = 0; i + 1 < bc.lines.size(); i += 2) {
    const auto& [pa, seg_a] = bc.lines[i];
    const auto& [pb, seg_b] = bc.lines[i + 1];
    CHECK(pa == "A");
    CHECK(pb == "B");
    REQUIRE(seg_a.size() == seg_b.size());
    for (size_t t = 0; t < seg_a.size(); ++t)
      CHECK(dict.at(seg_a[t]) == seg_b[t]);
  }
}

TEST_CASE("two group corpus plants contrastive words") {
  TwoGroupOptions opt;
  opt.base = small_opts(13);
  opt.planted = 4;
  TwoGroupCorpus tg = two_group_contrastive(opt);
  CHECK(tg.planted_words.size() == 4);

  std::set<std::string> parts;
  for (const auto& [p, seg] : tg.lines) parts.insert(p);
  CHECK(parts == std::set<std::string>{"R", "D"});

  // each planted word shows up in both groups
  for (const auto& w : tg.planted_words) {
    size_t in_r = 0, in_d = 0;
    for (const auto& [p, seg] : tg.lines)
      for (const auto& tok : seg)
        if (tok == w) (p == "R" ? in_r : in_d)++;
    CHECK(in_r > 0);
    CHECK(in_d > 0);
  }
}

TEST_CASE("planted collocation hits every n-th segment") {
  TopicOptions opt = small_opts(17);
  CollocationCorpus cc = planted_collocation(opt, 3);
  CHECK(cc.word_a == opt.word_prefix + "colla");
  CHECK(cc.word_b == opt.word_prefix + "collb");

  for (size_t i = 0; i < cc.lines.size(); ++i) {
    const auto& seg = cc.lines[i];
    bool has = std::find(seg.begin(), seg.end(), cc.word_a) != seg.end();
    if (i % 3 == 0) {
      CHECK(has);
      // collb directly follows colla
      REQUIRE(seg.size() >= 2);
      CHECK(seg[seg.size() - 2] == cc.word_a);
      CHECK(seg[seg.size() - 1] == cc.word_b);
    } else {
      CHECK(!has);
    }
  }
}

TEST_CASE("similarity study separates edges from the benchmark") {
  TopicOptions opt = small_opts(19);
  SimStudy study = topic_similarity_study(opt, 3, 20, 20, 23);
  CHECK(!study.edges.empty());
  REQUIRE(study.bench.pairs.size() == 40);

  auto canon = [](const std::string& a, const std::string& b) {
    return a < b ? a + "|" + b : b + "|" + a;
  };
  std::set<std::string> edge_pairs;
  std::set<std::string> directed;
  for (const auto& e : study.edges) {
    // rho-to-alpha ties, one edge per direction of the pair
    CHECK(e.a.role == Role::kRho);
    CHECK(e.b.role == Role::kAlpha);
    CHECK(e.weight > 0.0);
    edge_pairs.insert(canon(e.a.word, e.b.word));
    directed.insert(e.a.word + "|" + e.b.word);
  }
  for (const auto& e : study.edges)
    CHECK(directed.count(e.b.word + "|" + e.a.word) == 1);

  std::map<std::string, size_t> idx;
  for (size_t i = 0; i < opt.vocab; ++i) idx[word_name(opt, i)] = i;
  size_t same = 0, cross = 0;
  for (const auto& p : study.bench.pairs) {
    CHECK(edge_pairs.count(canon(p.word1, p.word2)) == 0);
    bool same_topic = topic_of_word(idx.at(p.word1), opt.topics) ==
                      topic_of_word(idx.at(p.word2), opt.topics);
    if (same_topic) {
      ++same;
      CHECK(p.score > 7.5);
    } else {
      ++cross;
      CHECK(p.score < 2.5);
    }
  }
  CHECK(same == 20);
  CHECK(cross == 20);

  // edge words all share a topic with their partner
  for (const auto& e : study.edges)
    CHECK(topic_of_word(idx.at(e.a.word), opt.topics) ==
          topic_of_word(idx.at(e.b.word), opt.topics));
}

TEST_CASE("corpus writers emit loadable text") {
  TopicOptions opt = small_opts(29);
  opt.tokens = 400;
  auto lines = topic_corpus(opt);

  std::ostringstream plain;
  write_plain(lines, plain);
  const std::string flat = plain.str();
  CHECK(size_t(std::count(flat.begin(), flat.end(), '\n')) == lines.size());

  BilingualCorpus bc = mirrored_bilingual(opt);
  std::ostringstream part;
  write_partitioned(bc.lines, part);
  std::string text = part.str();
  CHECK(text.find("A\t") == 0);
  CHECK(size_t(std::count(text.begin(), text.end(), '\n')) ==
        bc.lines.size());
}
