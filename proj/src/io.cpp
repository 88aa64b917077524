#include "cdg/io.hpp"

#include "cdg/tree.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cdg {

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) fail(std::string("unexpected end of input, expected ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(source_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string source_;
  int lineno_ = 0;
};

template <typename... T>
void scan(LineReader& r, const std::string& line, const char* what, T&... out) {
  std::istringstream ss(line);
  ((ss >> out), ...);
  if (!ss) r.fail(std::string("malformed ") + what + " line: '" + line + "'");
  std::string rest;
  if (ss >> rest) r.fail(std::string("trailing text in ") + what + " line: '" + line + "'");
}

int read_header(LineReader& r) {
  int d = 0;
  scan(r, r.require("header"), "header", d);
  if (d < 2) r.fail("need d >= 2, got " + std::to_string(d));
  return d;
}

int to_index(LineReader& r, int label, int d) {
  if (label < 1 || label > d)
    r.fail("node label " + std::to_string(label) + " outside 1.." + std::to_string(d));
  return label - 1;
}

std::ifstream open(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return f;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

TreeModel parse_model(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  const int d = read_header(r);
  std::vector<Marginal2> nodes(static_cast<std::size_t>(d));
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < d; ++k) {
    int i = 0;
    double p0 = 0;
    scan(r, r.require("node marginal"), "node marginal", i, p0);
    const int idx = to_index(r, i, d);
    if (seen[idx]) r.fail("duplicate node " + std::to_string(i));
    seen[idx] = 1;
    nodes[idx] = Marginal2(p0, 1.0 - p0);
  }
  EdgeList edges;
  std::vector<Joint2> joints;
  for (int k = 0; k + 1 < d; ++k) {
    int i = 0, j = 0;
    double p00 = 0, p01 = 0, p10 = 0, p11 = 0;
    scan(r, r.require("edge joint"), "edge joint", i, j, p00, p01, p10, p11);
    const int a = to_index(r, i, d), b = to_index(r, j, d);
    Joint2 J;
    J << p00, p01, p10, p11;
    if (a > b) J.transposeInPlace();
    edges.emplace_back(a, b);
    joints.push_back(J);
  }
  std::string extra;
  if (r.next(extra)) r.fail("unexpected extra line '" + extra + "'");
  try {
    return TreeModel(d, std::move(edges), std::move(nodes), std::move(joints));
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
}

TreeModel read_model(const std::string& path) {
  auto f = open(path);
  return parse_model(f, path);
}

void write_model(std::ostream& out, const TreeModel& model) {
  out << model.d() << '\n';
  for (int i = 0; i < model.d(); ++i)
    out << i + 1 << ' ' << format_double(model.node_marginal(i)(0)) << '\n';
  for (std::size_t k = 0; k < model.edges().size(); ++k) {
    const Edge& e = model.edges()[k];
    const Joint2& J = model.edge_marginal(k);
    out << e.u + 1 << ' ' << e.v + 1 << ' ' << format_double(J(0, 0)) << ' '
        << format_double(J(0, 1)) << ' ' << format_double(J(1, 0)) << ' '
        << format_double(J(1, 1)) << '\n';
  }
}

PhysicalNetwork parse_network(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  const int d = read_header(r);
  std::vector<Link> links;
  std::string line;
  while (r.next(line)) {
    int i = 0, j = 0;
    double c = 0;
    scan(r, line, "link", i, j, c);
    const int a = to_index(r, i, d), b = to_index(r, j, d);
    if (a == b) r.fail("self loop at node " + std::to_string(i));
    links.push_back({Edge(a, b), c});
  }
  try {
    return PhysicalNetwork(d, std::move(links));
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
}

PhysicalNetwork read_network(const std::string& path) {
  auto f = open(path);
  return parse_network(f, path);
}

void write_network(std::ostream& out, const PhysicalNetwork& net) {
  out << net.d() << '\n';
  for (const Link& l : net.links())
    out << l.edge.u + 1 << ' ' << l.edge.v + 1 << ' ' << format_double(l.cost) << '\n';
}

SampleSet parse_samples(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::vector<std::uint8_t> values;
  int d = -1;
  Eigen::Index n = 0;
  std::string line;
  while (r.next(line)) {
    int count = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      auto first = line.find_first_not_of(" \t", pos);
      auto last = line.find_last_not_of(" \t", comma == 0 ? 0 : comma - 1);
      if (first == std::string::npos || first >= comma || last < first)
        r.fail("empty field in '" + line + "'");
      const std::string field = line.substr(first, last - first + 1);
      if (field != "0" && field != "1") r.fail("value '" + field + "' is not 0 or 1");
      values.push_back(field == "1");
      ++count;
      pos = comma + 1;
    }
    if (d < 0) d = count;
    if (count != d)
      r.fail("row has " + std::to_string(count) + " values, expected " + std::to_string(d));
    ++n;
  }
  if (n == 0) r.fail("no samples");
  SampleSet::Matrix m(n, d);
  for (Eigen::Index s = 0; s < n; ++s)
    for (int i = 0; i < d; ++i) m(s, i) = values[static_cast<std::size_t>(s * d + i)];
  return SampleSet(std::move(m));
}

SampleSet read_samples(const std::string& path) {
  auto f = open(path);
  return parse_samples(f, path);
}

void write_samples(std::ostream& out, const SampleSet& samples) {
  const auto& m = samples.data();
  std::string row;
  for (Eigen::Index s = 0; s < m.rows(); ++s) {
    row.clear();
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
      if (i) row += ',';
      row += m(s, i) ? '1' : '0';
    }
    row += '\n';
    out << row;
  }
}

TreeFile parse_tree(std::istream& in, const std::string& source) {
  TreeFile t;
  std::string line;
  // The metadata line is a comment, so scan for it separately.
  std::ostringstream body;
  for (std::string raw; std::getline(in, raw);) {
    const auto first = raw.find_first_not_of(" \t");
    if (t.metadata.empty() && first != std::string::npos && raw.compare(first, 2, "# ") == 0 &&
        raw.find('{') != std::string::npos) {
      t.metadata = raw.substr(raw.find('{'));
      while (!t.metadata.empty() && (t.metadata.back() == '\r' || t.metadata.back() == ' '))
        t.metadata.pop_back();
    }
    body << raw << '\n';
  }
  std::istringstream again(body.str());
  LineReader rr(again, source);
  std::vector<std::pair<int, int>> labels;
  int max_label = 0;
  while (rr.next(line)) {
    int i = 0, j = 0;
    scan(rr, line, "edge", i, j);
    if (i < 1 || j < 1) rr.fail("node labels must be >= 1");
    labels.emplace_back(i, j);
    max_label = std::max({max_label, i, j});
  }
  t.d = static_cast<int>(labels.size()) + 1;
  if (labels.empty()) rr.fail("no edges");
  if (max_label > t.d) rr.fail("label " + std::to_string(max_label) + " exceeds d = " + std::to_string(t.d));
  for (auto [i, j] : labels) t.edges.emplace_back(i - 1, j - 1);
  t.edges = canonical(std::move(t.edges));
  if (!is_spanning_tree(t.d, t.edges)) throw Error(source + ": edges do not form a spanning tree");
  return t;
}

TreeFile read_tree(const std::string& path) {
  auto f = open(path);
  return parse_tree(f, path);
}

void write_tree(std::ostream& out, const EdgeList& edges, const std::string& metadata) {
  if (!metadata.empty()) out << "# " << metadata << '\n';
  for (const Edge& e : edges) out << e.u + 1 << ' ' << e.v + 1 << '\n';
}

std::vector<std::array<int, 3>> parse_subsets(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::vector<std::array<int, 3>> out;
  std::string line;
  while (r.next(line)) {
    for (char& c : line)
      if (c == ',') c = ' ';
    std::array<int, 3> t{};
    scan(r, line, "subset", t[0], t[1], t[2]);
    out.push_back(t);
  }
  return out;
}

std::vector<std::array<int, 3>> read_subsets(const std::string& path) {
  auto f = open(path);
  return parse_subsets(f, path);
}

}  // namespace cdg
