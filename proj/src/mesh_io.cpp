#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "surfrec/mesh.hpp"

namespace surfrec {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::filesystem::path& path, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" + std::string(tok) + "'");
  return value;
}

/// Reads lines, skipping blanks and '#' comments; keeps 1-based line numbers for messages.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, buffer_)) {
      ++line_;
      auto s = std::string_view(buffer_);
      if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      tokens = split(s);
      return true;
    }
    return false;
  }
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

TriMesh load_off(const std::filesystem::path& path, MeshOptions options) {
  LineReader reader(path);
  std::vector<std::string_view> tok;
  if (!reader.next(tok) || tok.size() != 1 || tok[0] != "OFF") throw IoError(path.string() + ": missing OFF header");
  if (!reader.next(tok) || tok.size() < 2) throw IoError(path.string() + ": missing 'V F E' counts line");
  const auto nv = parse_number<std::size_t>(tok[0], path, reader.line());
  const auto nf = parse_number<std::size_t>(tok[1], path, reader.line());

  std::vector<Vec3> vertices(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!reader.next(tok) || tok.size() < 3)
      throw IoError(path.string() + ": expected vertex line " + std::to_string(i));
    for (int k = 0; k < 3; ++k) vertices[i][k] = parse_number<double>(tok[static_cast<std::size_t>(k)], path, reader.line());
  }
  std::vector<Face> faces(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!reader.next(tok)) throw IoError(path.string() + ": expected face line " + std::to_string(i));
    const auto n = parse_number<int>(tok[0], path, reader.line());
    if (n != 3 || tok.size() < 4)
      throw IoError(path.string() + ":" + std::to_string(reader.line()) + ": only triangular faces are supported");
    for (int k = 0; k < 3; ++k) faces[i][k] = parse_number<VertexId>(tok[static_cast<std::size_t>(k) + 1], path, reader.line());
  }
  return TriMesh(std::move(vertices), std::move(faces), options);
}

TriMesh load_obj(const std::filesystem::path& path, MeshOptions options) {
  LineReader reader(path);
  std::vector<std::string_view> tok;
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  while (reader.next(tok)) {
    if (tok[0] == "v") {
      if (tok.size() < 4) throw IoError(path.string() + ":" + std::to_string(reader.line()) + ": short 'v' record");
      Vec3 p;
      for (int k = 0; k < 3; ++k) p[k] = parse_number<double>(tok[static_cast<std::size_t>(k) + 1], path, reader.line());
      vertices.push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() != 4)
        throw IoError(path.string() + ":" + std::to_string(reader.line()) + ": only triangular faces are supported");
      Face f{};
      for (int k = 0; k < 3; ++k) {
        auto t = tok[static_cast<std::size_t>(k) + 1];
        t = t.substr(0, t.find('/'));  // "i/t/n" -> "i"
        const auto idx = parse_number<VertexId>(t, path, reader.line());
        if (idx < 1) throw IoError(path.string() + ":" + std::to_string(reader.line()) + ": OBJ indices are 1-based");
        f[k] = idx - 1;
      }
      faces.push_back(f);
    }
    // Other record types (vn, vt, o, g, s, ...) are ignored.
  }
  return TriMesh(std::move(vertices), std::move(faces), options);
}

void append_double(std::string& out, double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, ptr);
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".off" || ext == ".OFF") return MeshFormat::off;
  if (ext == ".obj" || ext == ".OBJ") return MeshFormat::obj;
  throw IoError("unknown mesh extension '" + ext + "' (expected .off or .obj)");
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format, MeshOptions options) {
  return format == MeshFormat::off ? load_off(path, options) : load_obj(path, options);
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  if (path.empty()) throw IoError("save_mesh: empty path");
  std::string out;
  out.reserve(mesh.vertex_count() * 64 + mesh.face_count() * 24);
  // Shortest round-trip decimal for every coordinate.
  if (format == MeshFormat::off) {
    out += "OFF\n";
    out += std::to_string(mesh.vertex_count()) + " " + std::to_string(mesh.face_count()) + " 0\n";
  }
  for (const Vec3& p : mesh.vertices()) {
    if (format == MeshFormat::obj) out += "v ";
    for (int k = 0; k < 3; ++k) {
      append_double(out, p[k]);
      out += k < 2 ? ' ' : '\n';
    }
  }
  const int base = format == MeshFormat::obj ? 1 : 0;
  for (const Face& f : mesh.faces()) {
    out += format == MeshFormat::obj ? "f " : "3 ";
    out += std::to_string(f[0] + base) + " " + std::to_string(f[1] + base) + " " + std::to_string(f[2] + base) + "\n";
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out;
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace surfrec
