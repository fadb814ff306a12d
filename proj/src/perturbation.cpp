#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "surfrec/surface.hpp"

namespace surfrec {

namespace {

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_order(std::string_view tok) {
  if (tok == "inf" || tok == "none") return kNoPerturbation;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ConfigError("perturbation: cannot parse order '" + std::string(tok) + "'");
  return v;
}

bool parse_mode(std::string_view tok) {
  if (tok == "rand") return true;
  if (tok == "det") return false;
  throw ConfigError("perturbation: mode must be 'rand' or 'det', got '" + std::string(tok) + "'");
}

std::string order_text(double p) {
  if (p == kNoPerturbation) return "inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, ptr);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void PerturbationSpec::validate() const {
  for (const double p : {normal_order, tangential_order}) {
    if (p != 2.0 && p != 3.0 && p != kNoPerturbation)
      throw ConfigError("perturbation order must be 2, 3 or inf, got " + order_text(p));
  }
  if (!(magnitude > 0.0) || !std::isfinite(magnitude))
    throw ConfigError("perturbation magnitude must be positive and finite");
}

PerturbationSpec parse_perturbation(std::string_view text) {
  PerturbationSpec spec;
  if (text.empty() || text == "none") return spec;
  int normal_mode = -1;
  int tangential_mode = -1;
  int global_mode = -1;
  for (const auto item : split_on(text, ',')) {
    const auto parts = split_on(item, ':');
    if (parts[0] == "normal" || parts[0] == "tangential") {
      if (parts.size() < 2 || parts.size() > 3)
        throw ConfigError("perturbation: expected '" + std::string(parts[0]) + ":ORDER[:rand|det]'");
      const double order = parse_order(parts[1]);
      const int mode = parts.size() == 3 ? static_cast<int>(parse_mode(parts[2])) : -1;
      if (parts[0] == "normal") {
        spec.normal_order = order;
        normal_mode = mode;
      } else {
        spec.tangential_order = order;
        tangential_mode = mode;
      }
    } else if (item == "rand" || item == "det") {
      global_mode = static_cast<int>(parse_mode(item));
    } else if (item.substr(0, 2) == "c=") {
      const auto v = item.substr(2);
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), spec.magnitude);
      if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("perturbation: cannot parse magnitude '" + std::string(v) + "'");
    } else {
      throw ConfigError("perturbation: unknown item '" + std::string(item) + "'");
    }
  }
  spec.normal_random = (normal_mode >= 0 ? normal_mode : global_mode) == 1;
  spec.tangential_random = (tangential_mode >= 0 ? tangential_mode : global_mode) == 1;
  spec.validate();
  return spec;
}

std::string format_perturbation(const PerturbationSpec& spec) {
  if (spec.is_identity()) return "none";
  std::string out = "normal:" + order_text(spec.normal_order) + (spec.normal_random ? ":rand" : ":det");
  out += ",tangential:" + order_text(spec.tangential_order) + (spec.tangential_random ? ":rand" : ":det");
  if (spec.magnitude != 1.0) out += ",c=" + order_text(spec.magnitude);
  return out;
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(n[k]) < std::abs(n[axis])) axis = k;
  Vec3 t1 = Vec3::Unit(axis);
  t1 -= t1.dot(n) * n;
  t1.normalize();
  return {t1, n.cross(t1)};
}

TriMesh perturb_mesh(const TriMesh& mesh_star, const LevelSetSurface& surface, const PerturbationSpec& spec) {
  spec.validate();
  if (spec.is_identity()) return mesh_star;
  const double h = mesh_stats(mesh_star).h;
  const double dn = spec.normal_order == kNoPerturbation ? 0.0 : spec.magnitude * std::pow(h, spec.normal_order);
  const double dt =
      spec.tangential_order == kNoPerturbation ? 0.0 : spec.magnitude * std::pow(h, spec.tangential_order);

  std::mt19937_64 rng(spec.seed);
  std::vector<Vec3> v(mesh_star.vertices());
  for (Vec3& p : v) {
    // Three draws per vertex regardless of the spec keep streams aligned across regimes.
    const double angle = 2.0 * std::numbers::pi * uniform01(rng);
    const double rn = 2.0 * uniform01(rng) - 1.0;
    const double rt = 2.0 * uniform01(rng) - 1.0;
    const Vec3 n = surface.normal(p);
    const auto [t1, t2] = tangent_basis(n);
    const Vec3 t = std::cos(angle) * t1 + std::sin(angle) * t2;
    p += (spec.normal_random ? rn : 1.0) * dn * n + (spec.tangential_random ? rt : 1.0) * dt * t;
  }
  return mesh_star.with_vertices(std::move(v));
}

TrianglePairTransform pair_transform(const Triangle& tau1, const Triangle& tau2) {
  const Vec3 e1 = tau1[1] - tau1[0];
  const Vec3 e2 = tau1[2] - tau1[0];
  const Vec3 cr = e1.cross(e2);
  const double scale = std::max(e1.squaredNorm(), e2.squaredNorm());
  if (!(cr.norm() > 1e-14 * scale)) throw GeometryError("pair_transform: degenerate reference triangle");
  Mat3 frame;
  frame.col(0) = e1.normalized();
  frame.col(2) = cr.normalized();
  frame.col(1) = frame.col(2).cross(frame.col(0));

  Mat2 xi;
  xi << frame.col(0).dot(e1), frame.col(0).dot(e2), frame.col(1).dot(e1), frame.col(1).dot(e2);
  Mat32 psi;
  psi.col(0) = frame.transpose() * (tau2[1] - tau2[0]);
  psi.col(1) = frame.transpose() * (tau2[2] - tau2[0]);

  TrianglePairTransform t;
  t.jacobian = psi * xi.inverse();
  t.metric = t.jacobian.transpose() * t.jacobian;
  t.sqrt_det = std::sqrt(std::max(t.metric.determinant(), 0.0));
  return t;
}

SuperclosenessReport supercloseness_report(const TriMesh& mesh_star, const TriMesh& mesh_dev) {
  if (!mesh_star.same_connectivity(mesh_dev))
    throw MeshError("supercloseness_report: meshes have different connectivity");
  Mat32 id = Mat32::Zero();
  id(0, 0) = id(1, 1) = 1.0;
  SuperclosenessReport r;
  for (FaceId f = 0; f < static_cast<FaceId>(mesh_star.face_count()); ++f) {
    const auto a = mesh_star.face_points(f);
    const auto b = mesh_dev.face_points(f);
    if (a == b) continue;  // identity pair, skip the rounding of Psi Xi^-1
    const auto t = pair_transform(a, b);
    r.jacobian = std::max(r.jacobian, (t.jacobian - id).cwiseAbs().maxCoeff());
    r.metric = std::max(r.metric, (t.metric - Mat2::Identity()).cwiseAbs().maxCoeff());
    r.sqrt_det = std::max(r.sqrt_det, std::abs(t.sqrt_det - 1.0));
  }
  return r;
}

}  // namespace surfrec
