#pragma once

#include "discwalk/graph.hpp"
#include "discwalk/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace discwalk::cli {

struct RunConfig {
  std::string command;  // partial-color, sparsify, uc, sv, sketch, resist, decompose, verify
  double epsilon = 0.5;
  long c_support = 1024;
  std::optional<double> phi_target;
  double c_accuracy = 4;
  std::string input_path;
  std::string second_path;  // verify: the candidate graph
  std::string output_path;  // empty: standard output
  std::string report_path;  // empty: standard output
  std::string vectors_path;
  std::string kind = "spectral";  // verify
  bool check = false;
};

/// Header "n <count> [directed]", then "u v [w]" lines; '#' starts a comment.
/// Duplicate edges are merged by summing weights; edges are sorted by (u, v).
Graph parse_edge_list(const std::string& text);
/// Same format, weights at 12 significant digits.
std::string serialize(const Graph& g);
/// One vector per line, `n` whitespace-separated entries.
std::vector<Vector> parse_vectors(const std::string& text, Index n);

std::string read_file(const std::string& path);

/// 0: success (and check passed), 1: check failed or the algorithm gave up,
/// 2: bad input.
int run(const RunConfig& config);
/// Parses command-line arguments into a RunConfig and runs it.
int main(int argc, char** argv);

}  // namespace discwalk::cli
