#pragma once

#include "cdg/common.hpp"
#include "cdg/hardness.hpp"
#include "cdg/model.hpp"
#include "cdg/physnet.hpp"

#include <array>
#include <iosfwd>
#include <string>

// Text formats. Node labels are 1-based in files and 0-based in memory.
//   model:    d / d lines "i p0" / d-1 lines "i j p00 p01 p10 p11"
//   network:  d / lines "i j cost"
//   samples:  CSV, one sample per row, values 0/1
//   tree:     optional "# {json}" metadata line, then lines "i j"
//   subsets:  one triple "a b c" per line
// Blank lines and lines starting with '#' are skipped on input.

namespace cdg {

/// Shortest decimal form that round-trips.
std::string format_double(double x);

TreeModel parse_model(std::istream& in, const std::string& source = "<model>");
TreeModel read_model(const std::string& path);
void write_model(std::ostream& out, const TreeModel& model);

PhysicalNetwork parse_network(std::istream& in, const std::string& source = "<network>");
PhysicalNetwork read_network(const std::string& path);
void write_network(std::ostream& out, const PhysicalNetwork& net);

SampleSet parse_samples(std::istream& in, const std::string& source = "<samples>");
SampleSet read_samples(const std::string& path);
void write_samples(std::ostream& out, const SampleSet& samples);

struct TreeFile {
  int d = 0;
  EdgeList edges;
  std::string metadata;  // raw JSON text, may be empty
};

TreeFile parse_tree(std::istream& in, const std::string& source = "<tree>");
TreeFile read_tree(const std::string& path);
void write_tree(std::ostream& out, const EdgeList& edges, const std::string& metadata = {});

std::vector<std::array<int, 3>> parse_subsets(std::istream& in,
                                              const std::string& source = "<subsets>");
std::vector<std::array<int, 3>> read_subsets(const std::string& path);

}  // namespace cdg
