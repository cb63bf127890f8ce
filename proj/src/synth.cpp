#include "pelp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "pelp/errors.hpp"
#include "pelp/rng.hpp"

namespace pelp {
namespace synth {

namespace {

constexpr uint64_t kCorpusTag = 0x636f7270ull;
constexpr uint64_t kPlantTag = 0x706c6e74ull;
constexpr uint64_t kStudyTag = 0x73747564ull;

// cumulative table for weighted draws
struct Table {
  std::vector<double> cum;
  std::vector<uint32_t> ids;

  void add(uint32_t id, double w) {
    ids.push_back(id);
    cum.push_back((cum.empty() ? 0.0 : cum.back()) + w);
  }
  uint32_t draw(Rng& rng) const {
    double u = rng.uniform01() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return ids[size_t(it - cum.begin())];
  }
};

void validate(const TopicOptions& opt) {
  if (opt.vocab < 2) throw DataError("synthetic vocab must be >= 2");
  if (opt.topics < 1) throw DataError("synthetic topics must be >= 1");
  if (opt.segment_len < 2) throw DataError("segment_len must be >= 2");
  if (opt.tokens < size_t(opt.segment_len))
    throw DataError("tokens must cover at least one segment");
  if (size_t(opt.topics) > opt.vocab)
    throw DataError("more topics than words");
  if (!(opt.zipf >= 0.0)) throw DataError("zipf exponent must be >= 0");
  if (!(opt.leak >= 0.0 && opt.leak <= 1.0))
    throw DataError("leak must be in [0,1]");
}

// weight of word i: (1 + in-topic rank)^-zipf
double word_weight(size_t i, const TopicOptions& opt) {
  double rank = double(i / size_t(opt.topics));
  return std::pow(1.0 + rank, -opt.zipf);
}

struct Tables {
  std::vector<Table> per_topic;
  Table global;
};

Tables build_tables(const TopicOptions& opt) {
  Tables t;
  t.per_topic.resize(size_t(opt.topics));
  for (uint32_t i = 0; i < opt.vocab; ++i) {
    double w = word_weight(i, opt);
    t.per_topic[size_t(topic_of_word(i, opt.topics))].add(i, w);
    t.global.add(i, w);
  }
  return t;
}

}  // namespace

int topic_of_word(size_t word_index, int topics) {
  return int(word_index % size_t(topics));
}

std::string word_name(const TopicOptions& opt, size_t word_index) {
  return opt.word_prefix + std::to_string(word_index);
}

std::vector<std::vector<std::string>> topic_corpus(const TopicOptions& opt) {
  validate(opt);
  Tables tables = build_tables(opt);
  Rng rng(mix64(opt.seed, kCorpusTag));
  const size_t n_segments = opt.tokens / size_t(opt.segment_len);
  std::vector<std::vector<std::string>> lines;
  lines.reserve(n_segments);
  for (size_t s = 0; s < n_segments; ++s) {
    int topic = int(rng.below(uint64_t(opt.topics)));
    std::vector<std::string> seg;
    seg.reserve(size_t(opt.segment_len));
    for (int i = 0; i < opt.segment_len; ++i) {
      uint32_t w = (opt.leak > 0.0 && rng.uniform01() < opt.leak)
                       ? tables.global.draw(rng)
                       : tables.per_topic[size_t(topic)].draw(rng);
      seg.push_back(word_name(opt, w));
    }
    lines.push_back(std::move(seg));
  }
  return lines;
}

BilingualCorpus mirrored_bilingual(const TopicOptions& opt,
                                   const std::string& label_a,
                                   const std::string& label_b) {
  if (label_a == label_b) throw DataError("bilingual labels must differ");
  auto base = topic_corpus(opt);
  BilingualCorpus out;
  out.label_a = label_a;
  out.label_b = label_b;
  const std::string pa = label_a + "_", pb = label_b + "_";
  out.lines.reserve(2 * base.size());
  for (const auto& seg : base) {
    std::vector<std::string> sa, sb;
    sa.reserve(seg.size());
    sb.reserve(seg.size());
    for (const auto& w : seg) {
      sa.push_back(pa + w);
      sb.push_back(pb + w);
    }
    out.lines.emplace_back(label_a, std::move(sa));
    out.lines.emplace_back(label_b, std::move(sb));
  }
  out.pairs.reserve(opt.vocab);
  for (size_t i = 0; i < opt.vocab; ++i) {
    std::string w = word_name(opt, i);
    out.pairs.emplace_back(pa + w, pb + w);
  }
  return out;
}

TwoGroupCorpus two_group_contrastive(const TwoGroupOptions& opt) {
  validate(opt.base);
  if (opt.planted < 1) throw DataError("need at least one planted word");
  if (opt.base.topics < 2)
    throw DataError("contrastive corpus needs >= 2 topics");
  if (opt.group_a == opt.group_b)
    throw DataError("group labels must differ");
  if (!(opt.plant_rate > 0.0)) throw DataError("plant_rate must be > 0");

  Tables tables = build_tables(opt.base);
  TwoGroupCorpus out;
  for (int j = 0; j < opt.planted; ++j)
    out.planted_words.push_back("planted" + std::to_string(j));

  const size_t n_segments = opt.base.tokens / size_t(opt.base.segment_len);
  const int topics = opt.base.topics;
  // host topic of planted word j: groups disagree by a half-rotation
  auto host = [&](int j, bool group_b) {
    int h = j % topics;
    if (group_b) h = (h + std::max(1, topics / 2)) % topics;
    return h;
  };

  for (int g = 0; g < 2; ++g) {
    const bool is_b = g == 1;
    const std::string& label = is_b ? opt.group_b : opt.group_a;
    Rng rng(mix64(opt.base.seed, kCorpusTag, uint64_t(g)));
    Rng plant_rng(mix64(opt.base.seed, kPlantTag, uint64_t(g)));
    for (size_t s = 0; s < n_segments; ++s) {
      int topic = int(rng.below(uint64_t(topics)));
      std::vector<std::string> seg;
      seg.reserve(size_t(opt.base.segment_len) + 4);
      for (int i = 0; i < opt.base.segment_len; ++i) {
        uint32_t w = (opt.base.leak > 0.0 && rng.uniform01() < opt.base.leak)
                         ? tables.global.draw(rng)
                         : tables.per_topic[size_t(topic)].draw(rng);
        seg.push_back(word_name(opt.base, w));
      }
      for (int j = 0; j < opt.planted; ++j) {
        if (host(j, is_b) != topic) continue;
        double expect = opt.plant_rate;
        int copies = int(expect);
        if (plant_rng.uniform01() < expect - double(copies)) ++copies;
        for (int c = 0; c < copies; ++c) {
          size_t pos = size_t(plant_rng.below(seg.size() + 1));
          seg.insert(seg.begin() + std::ptrdiff_t(pos), out.planted_words[j]);
        }
      }
      out.lines.emplace_back(label, std::move(seg));
    }
  }
  return out;
}

CollocationCorpus planted_collocation(const TopicOptions& opt,
                                      size_t every_n_segments) {
  if (every_n_segments < 1) throw DataError("every_n_segments must be >= 1");
  CollocationCorpus out;
  out.word_a = opt.word_prefix + "colla";
  out.word_b = opt.word_prefix + "collb";
  out.lines = topic_corpus(opt);
  for (size_t s = 0; s < out.lines.size(); s += every_n_segments) {
    out.lines[s].push_back(out.word_a);
    out.lines[s].push_back(out.word_b);
  }
  return out;
}

SimStudy topic_similarity_study(const TopicOptions& opt,
                                size_t edge_pairs_per_topic,
                                size_t bench_same, size_t bench_cross,
                                uint64_t seed) {
  validate(opt);
  if (opt.topics < 2) throw DataError("similarity study needs >= 2 topics");
  Rng rng(mix64(seed, kStudyTag));

  // candidate words per topic: the more frequent 60 percent
  std::vector<std::vector<uint32_t>> pool(size_t(opt.topics));
  for (uint32_t i = 0; i < opt.vocab; ++i)
    pool[size_t(topic_of_word(i, opt.topics))].push_back(i);
  for (auto& p : pool) {
    size_t keep = std::max<size_t>(2, p.size() * 6 / 10);
    p.resize(std::min(p.size(), keep));  // ids ascend with rank already
  }

  SimStudy study;
  std::set<std::pair<uint32_t, uint32_t>> used;
  auto canonical = [](uint32_t a, uint32_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  auto sample_same_topic = [&](std::pair<uint32_t, uint32_t>& out_pair) {
    for (int tries = 0; tries < 1000; ++tries) {
      int t = int(rng.below(uint64_t(opt.topics)));
      const auto& p = pool[size_t(t)];
      if (p.size() < 2) continue;
      uint32_t a = p[size_t(rng.below(p.size()))];
      uint32_t b = p[size_t(rng.below(p.size()))];
      if (a == b) continue;
      auto c = canonical(a, b);
      if (used.count(c)) continue;
      used.insert(c);
      out_pair = c;
      return true;
    }
    return false;
  };

  for (int t = 0; t < opt.topics; ++t) {
    for (size_t e = 0; e < edge_pairs_per_topic; ++e) {
      std::pair<uint32_t, uint32_t> pr;
      if (!sample_same_topic(pr)) break;
      std::string u = word_name(opt, pr.first), v = word_name(opt, pr.second);
      study.edges.push_back({rho_key("_", u), alpha_key("_", v), 1.0});
      study.edges.push_back({rho_key("_", v), alpha_key("_", u), 1.0});
    }
  }

  for (size_t i = 0; i < bench_same; ++i) {
    std::pair<uint32_t, uint32_t> pr;
    if (!sample_same_topic(pr)) break;
    study.bench.pairs.push_back({word_name(opt, pr.first),
                                 word_name(opt, pr.second),
                                 8.0 + rng.uniform(0.0, 2.0)});
  }
  for (size_t i = 0; i < bench_cross; ++i) {
    for (int tries = 0; tries < 1000; ++tries) {
      int ta = int(rng.below(uint64_t(opt.topics)));
      int tb = int(rng.below(uint64_t(opt.topics)));
      if (ta == tb) continue;
      const auto& pa = pool[size_t(ta)];
      const auto& pb = pool[size_t(tb)];
      uint32_t a = pa[size_t(rng.below(pa.size()))];
      uint32_t b = pb[size_t(rng.below(pb.size()))];
      auto c = canonical(a, b);
      if (used.count(c)) continue;
      used.insert(c);
      study.bench.pairs.push_back({word_name(opt, a), word_name(opt, b),
                                   rng.uniform(0.0, 2.0)});
      break;
    }
  }
  return study;
}

void write_partitioned(const CorpusLines& lines, std::ostream& out) {
  for (const auto& [label, tokens] : lines) {
    out << label << '\t';
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << tokens[i];
    }
    out << '\n';
  }
}

void write_plain(const std::vector<std::vector<std::string>>& lines,
                 std::ostream& out) {
  for (const auto& tokens : lines) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << tokens[i];
    }
    out << '\n';
  }
}

}  // namespace synth
}  // namespace pelp
