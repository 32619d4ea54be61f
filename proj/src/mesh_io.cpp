#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crackfreq/errors.hpp"
#include "crackfreq/slitmesh.hpp"

namespace crackfreq {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T read_value(std::istringstream& line, const char* what) {
  T value{};
  if (!(line >> value)) throw MeshFormatError(std::string("read_mesh: malformed ") + what);
  return value;
}

double read_double(std::istringstream& line, const char* what) {
  std::string token = read_value<std::string>(line, what);
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw MeshFormatError(std::string("read_mesh: bad number in ") + what);
  return v;
}

}  // namespace

void write_mesh(std::ostream& out, const SlitMesh& mesh) {
  out << "crackfreq-mesh 1\n";
  out << "kind " << (mesh.kind == SlitMesh::Kind::disk ? "disk" : "sphere") << '\n';
  out << "radius " << fmt(mesh.radius) << '\n';
  out << "grading_ratio " << fmt(mesh.grading_ratio) << '\n';
  out << "levels " << mesh.levels << '\n';
  for (const auto& v : mesh.vertices)
    out << "v " << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
  for (const auto& t : mesh.triangles) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& [u, l] : mesh.crack_pairs) out << "c " << u << ' ' << l << '\n';
  for (int tip : mesh.tip_vertex_ids) out << "tip " << tip << '\n';
  for (int b : mesh.outer_boundary_ids) out << "b " << b << '\n';
  for (double r : mesh.layer_radii) out << "layer " << fmt(r) << '\n';
}

SlitMesh read_mesh(std::istream& in) {
  SlitMesh mesh;
  std::string raw;
  if (!std::getline(in, raw) || raw != "crackfreq-mesh 1")
    throw MeshFormatError("read_mesh: missing 'crackfreq-mesh 1' header");
  while (std::getline(in, raw)) {
    if (raw.empty()) continue;
    std::istringstream line(raw);
    std::string tag;
    line >> tag;
    if (tag == "v") {
      const double x = read_double(line, "vertex");
      const double y = read_double(line, "vertex");
      const double z = read_double(line, "vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      for (int& idx : t) idx = read_value<int>(line, "triangle");
      mesh.triangles.push_back(t);
    } else if (tag == "c") {
      const int u = read_value<int>(line, "crack pair");
      const int l = read_value<int>(line, "crack pair");
      mesh.crack_pairs.emplace_back(u, l);
    } else if (tag == "tip") {
      mesh.tip_vertex_ids.push_back(read_value<int>(line, "tip"));
    } else if (tag == "b") {
      mesh.outer_boundary_ids.push_back(read_value<int>(line, "boundary id"));
    } else if (tag == "layer") {
      mesh.layer_radii.push_back(read_double(line, "layer"));
    } else if (tag == "kind") {
      const auto kind = read_value<std::string>(line, "kind");
      if (kind == "disk") mesh.kind = SlitMesh::Kind::disk;
      else if (kind == "sphere") mesh.kind = SlitMesh::Kind::sphere;
      else throw MeshFormatError("read_mesh: unknown kind '" + kind + "'");
    } else if (tag == "radius") {
      mesh.radius = read_double(line, "radius");
    } else if (tag == "grading_ratio") {
      mesh.grading_ratio = read_double(line, "grading_ratio");
    } else if (tag == "levels") {
      mesh.levels = read_value<int>(line, "levels");
    } else {
      throw MeshFormatError("read_mesh: unknown line tag '" + tag + "'");
    }
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  auto check_id = [nv](int id) {
    if (id < 0 || id >= nv) throw MeshFormatError("read_mesh: vertex id out of range");
  };
  for (const auto& t : mesh.triangles)
    for (int id : t) check_id(id);
  for (const auto& [u, l] : mesh.crack_pairs) {
    check_id(u);
    check_id(l);
  }
  for (int id : mesh.tip_vertex_ids) check_id(id);
  for (int id : mesh.outer_boundary_ids) check_id(id);
  if (mesh.tip_vertex_ids.empty()) throw MeshFormatError("read_mesh: no tip vertex");
  return mesh;
}

void save_mesh(const std::string& path, const SlitMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshFormatError("save_mesh: cannot open " + path);
  write_mesh(out, mesh);
}

SlitMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshFormatError("load_mesh: cannot open " + path);
  return read_mesh(in);
}

}  // namespace crackfreq
