#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sbs/error.hpp"
#include "sbs/graph.hpp"

namespace sbs {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

GraphTopology read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> n;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    std::istringstream fields(body);
    if (!n) {
      std::string tag;
      long long count = 0;
      if (!(fields >> tag >> count) || tag != "N" || count < 1)
        throw ValidationError(fmt::format("edge list line {}: expected `N <num_agents>`", line_no));
      n = static_cast<std::size_t>(count);
    } else {
      long long a = -1;
      long long b = -1;
      if (!(fields >> a >> b) || a < 0 || b < 0 ||
          a > std::numeric_limits<AgentId>::max() || b > std::numeric_limits<AgentId>::max())
        throw ValidationError(fmt::format("edge list line {}: expected `i j`", line_no));
      edges.emplace_back(static_cast<AgentId>(a), static_cast<AgentId>(b));
    }
    std::string extra;
    if (fields >> extra)
      throw ValidationError(fmt::format("edge list line {}: trailing token `{}`", line_no, extra));
  }
  if (!n) throw ValidationError("edge list: missing `N <num_agents>` header");
  return from_edge_list(*n, edges);
}

GraphTopology read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open edge list {}", path.string()));
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const GraphTopology& g) {
  out << "N " << g.num_agents() << '\n';
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

void write_edge_list(const std::filesystem::path& path, const GraphTopology& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  write_edge_list(out, g);
}

}  // namespace sbs
