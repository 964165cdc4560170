#include "slitlab/grid_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace slitlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::int64_t> int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  return out;
}

}  // namespace

void write_grid(std::ostream& out, const GridField& f) {
  const auto& g = f.grid;
  out << "# slitlab-grid n=" << g.n << " h=" << fmt(g.h) << " first=";
  for (int i = 0; i < g.n; ++i) out << (i ? "," : "") << g.first[i];
  out << " dims=";
  for (int i = 0; i < g.n; ++i) out << (i ? "," : "") << g.dims[i];
  out << " components=" << f.components << " mask=0/1\n";
  for (int i = 0; i < g.n; ++i) out << 'x' << i + 1 << ',';
  out << "mask,links,flags";
  for (int c = 0; c < f.components; ++c) out << ",v" << c;
  out << '\n';
  for (std::size_t cell = 0; cell < g.size(); ++cell) {
    const SmallPoint x = g.center(cell);
    for (int i = 0; i < g.n; ++i) out << fmt(x[i]) << ',';
    out << int(f.mask[cell]) << ',' << int(f.links[cell]) << ',' << int(f.flags[cell]);
    for (int c = 0; c < f.components; ++c) out << ',' << fmt(f.value(cell, c));
    out << '\n';
  }
}

GridField read_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# slitlab-grid", 0) != 0) throw Error("read_grid: missing grid header");
  GridGeometry g;
  int components = 1;
  std::stringstream meta(line.substr(14));
  std::string tok;
  std::vector<std::int64_t> first, dims;
  while (meta >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") g.n = std::stoi(val);
    else if (key == "h") g.h = std::stod(val);
    else if (key == "first") first = int_list(val);
    else if (key == "dims") dims = int_list(val);
    else if (key == "components") components = std::stoi(val);
  }
  require(g.n >= 1 && g.n <= kMaxDim && g.h > 0.0, "read_grid: bad lattice header");
  require(static_cast<int>(first.size()) == g.n && static_cast<int>(dims.size()) == g.n,
          "read_grid: bad lattice header");
  for (int i = 0; i < g.n; ++i) {
    g.first[i] = first[static_cast<std::size_t>(i)];
    g.dims[i] = dims[static_cast<std::size_t>(i)];
  }
  GridField f = GridField::zeros(g, components);
  std::getline(in, line);  // column header
  for (std::size_t cell = 0; cell < g.size(); ++cell) {
    if (!std::getline(in, line)) throw Error("read_grid: truncated body");
    std::stringstream row(line);
    std::string item;
    for (int i = 0; i < g.n; ++i) std::getline(row, item, ',');
    std::getline(row, item, ',');
    f.mask[cell] = static_cast<std::uint8_t>(std::stoi(item));
    std::getline(row, item, ',');
    f.links[cell] = static_cast<std::uint8_t>(std::stoi(item));
    std::getline(row, item, ',');
    f.flags[cell] = static_cast<std::uint8_t>(std::stoi(item));
    for (int c = 0; c < components; ++c) {
      if (!std::getline(row, item, ',')) throw Error("read_grid: short row");
      f.value(cell, c) = std::stod(item);
    }
  }
  return f;
}

void save_grid(const std::string& path, const GridField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_grid(out, f);
}

GridField load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read_grid(in);
}

}  // namespace slitlab
