#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pelp/graph.hpp"

namespace pelp {

// Text embedding format: first line `N D`, then one `nodekey v1 .. vD` line
// per row, 6 significant digits. `rows` selects and orders the output.
void write_embeddings_text(const EmbeddingState& state,
                           const std::vector<size_t>& rows, std::ostream& out);
EmbeddingState read_embeddings_text(std::istream& in);
EmbeddingState read_embeddings_text_file(const std::string& path);

// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] = tool name

}  // namespace pelp
