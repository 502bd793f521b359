#include "spincm/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "spincm/errors.hpp"
#include "spincm/lie.hpp"

namespace spincm::io {

namespace {

int one_based(const json& j, int n, const char* what) {
  if (!j.is_number_integer()) throw ValidationError(std::string(what) + ": index must be an integer");
  const int i = j.get<int>();
  if (i < 1 || i > n) throw ValidationError(std::string(what) + ": index " + std::to_string(i) + " out of range 1.." + std::to_string(n));
  return i - 1;
}

const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string(what) + ": missing \"" + key + "\"");
  return j.at(key);
}

lie::RootSubset delta_from_json(const json& j, int n) {
  lie::RootSubset s;
  s.kind = lie::RootSubset::Kind::delta;
  if (j.is_string()) {
    if (j.get<std::string>() != "full") throw ValidationError("delta_prime: expected \"full\", blocks or roots");
    return lie::full_delta(lie::LieContext(n));
  }
  if (j.contains("blocks")) {
    for (const auto& b : j.at("blocks")) {
      std::vector<int> idx;
      for (const auto& i : b) idx.push_back(one_based(i, n, "delta_prime.blocks"));
      for (int a : idx)
        for (int c : idx)
          if (a != c) s.delta_members.push_back({a, c});
    }
    return s;
  }
  if (j.contains("roots")) {
    for (const auto& r : j.at("roots")) {
      if (!r.is_array() || r.size() != 2) throw ValidationError("delta_prime.roots: each root is a pair [i, j]");
      s.delta_members.push_back({one_based(r[0], n, "delta_prime.roots"), one_based(r[1], n, "delta_prime.roots")});
    }
    return s;
  }
  throw ValidationError("delta_prime: expected \"full\", {\"blocks\": ...} or {\"roots\": ...}");
}

lie::RootSubset pi_from_json(const json& j, int n) {
  if (j.is_string()) {
    if (j.get<std::string>() != "full") throw ValidationError("pi_prime: expected \"full\" or a list");
    return lie::full_pi(lie::LieContext(n));
  }
  if (!j.is_array()) throw ValidationError("pi_prime: expected \"full\" or a list of simple-root indices");
  lie::RootSubset s;
  s.kind = lie::RootSubset::Kind::pi;
  for (const auto& i : j) s.pi_members.push_back(one_based(i, n - 1, "pi_prime"));
  return s;
}

json point_json(const Vec& q, const Vec& p, const char* key, const Mat& m) {
  json j;
  j["q"] = to_json(q);
  j["p"] = to_json(p);
  j[key] = to_json(m);
  return j;
}

Mat sparse_xi(int n, std::initializer_list<std::tuple<int, int, cplx>> entries) {
  Mat m = Mat::Zero(n, n);
  for (const auto& [i, j, v] : entries) m(i, j) = v;
  return m;
}

Vec vec_of(std::initializer_list<cplx> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (cplx x : xs) v(k++) = x;
  return v;
}

Mat dense_sl3_spin() {
  return sparse_xi(3, {{0, 1, {0.7, 0.2}},
                       {0, 2, {-0.4, 0.5}},
                       {1, 0, {0.3, -0.6}},
                       {1, 2, {0.8, 0.1}},
                       {2, 0, {-0.5, -0.2}},
                       {2, 1, {0.6, 0.4}}});
}

json rational_model(int n, json delta) { return {{"N", n}, {"family", "rational"}, {"delta_prime", std::move(delta)}}; }
json trig_model(int n, json pi) { return {{"N", n}, {"family", "trigonometric"}, {"pi_prime", std::move(pi)}}; }
json elliptic_model(int n) {
  return {{"N", n}, {"family", "elliptic"}, {"omega1", {1.0, 0.0}}, {"omega2", {0.3, 1.1}}};
}

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> table = [] {
    const Mat swap2 = sparse_xi(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    const Vec q3r = vec_of({{1.4, 0.05}, {0.1, -0.08}, {-1.5, 0.03}});
    const Vec p3 = vec_of({{0.6, 0.1}, {-0.2, 0.2}, {-0.4, -0.3}});
    std::vector<Preset> t;
    t.push_back({"free-flight", "rational sl(2), no spin", rational_model(2, "full"),
                 point_json(vec_of({1.0, -1.0}), vec_of({2.0, -2.0}), "xi", Mat::Zero(2, 2))});
    t.push_back({"rational-sl2", "rational sl(2), q = diag(1,-1), p = diag(2,-2), xi = E12 + E21",
                 rational_model(2, "full"), point_json(vec_of({1.0, -1.0}), vec_of({2.0, -2.0}), "xi", swap2)});
    t.push_back({"collision", "rational sl(2) pair colliding at t = 1/2", rational_model(2, "full"),
                 point_json(vec_of({0.5, -0.5}), vec_of({0.0, 0.0}), "xi", swap2)});
    t.push_back({"rational-sl3", "rational sl(3), full root set", rational_model(3, "full"),
                 point_json(q3r, p3, "xi", dense_sl3_spin())});
    t.push_back({"rational-sl3-block", "rational sl(3), partition {1,2},{3}",
                 rational_model(3, json{{"blocks", {{1, 2}, {3}}}}), point_json(q3r, p3, "xi", dense_sl3_spin())});
    t.push_back({"trig-sl2", "trigonometric sl(2), q = diag(pi/8,-pi/8), p = diag(1,-1)", trig_model(2, "full"),
                 point_json(vec_of({kPi / 8, -kPi / 8}), vec_of({1.0, -1.0}), "xi", swap2)});
    t.push_back({"trig-sl3", "trigonometric sl(3), pi' = {alpha_1}", trig_model(3, json::array({1})),
                 point_json(vec_of({{0.8, 0.05}, {0.0, -0.1}, {-0.8, 0.05}}), vec_of({{0.5, 0.1}, {-0.1, -0.2}, {-0.4, 0.1}}),
                            "xi", dense_sl3_spin())});
    t.push_back({"trig-breakdown", "trigonometric sl(2) pair at rest, collides near t = 0.18", trig_model(2, "full"),
                 point_json(vec_of({0.3, -0.3}), vec_of({0.0, 0.0}), "xi", swap2)});
    t.push_back({"elliptic-sl2", "elliptic sl(2), omega = (1, 0.3+1.1i)", elliptic_model(2),
                 point_json(vec_of({0.4, -0.4}), vec_of({0.5, -0.5}), "xi", swap2)});
    t.push_back({"elliptic-sl3", "elliptic sl(3), omega = (1, 0.3+1.1i)", elliptic_model(3),
                 point_json(vec_of({{0.45, 0.02}, {0.0, -0.04}, {-0.45, 0.02}}), p3, "xi", dense_sl3_spin())});
    t.push_back({"nilpotent", "elliptic sl(2) with xi = E12", elliptic_model(2),
                 point_json(vec_of({0.4, -0.4}), vec_of({0.5, -0.5}), "xi", sparse_xi(2, {{0, 1, 1.0}}))});
    return t;
  }();
  return table;
}

}  // namespace

const char* version() { return SPINCM_VERSION; }

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ValidationError("complex number must be a number or [re, im], got " + j.dump());
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    a.push_back(std::move(row));
  }
  return a;
}

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected a list");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

Mat mat_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + ": expected a list of rows");
  const size_t n = j.size();
  Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw ValidationError(std::string(what) + ": matrix must be square");
    for (size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from_json(j[i][k]);
  }
  return m;
}

ModelSpec model_from_json(const json& j) {
  const json& nj = field(j, "N", "model");
  if (!nj.is_number_integer()) throw ValidationError("model: N must be an integer");
  const int n = nj.get<int>();
  if (n < 2) throw ValidationError("model: N must be at least 2");
  const json& fj = field(j, "family", "model");
  if (!fj.is_string()) throw ValidationError("model: family must be a string");
  const std::string fam = fj.get<std::string>();
  if (fam == "rational") return ModelSpec::rational(n, delta_from_json(j.value("delta_prime", json("full")), n));
  if (fam == "trigonometric" || fam == "trig") return ModelSpec::trigonometric(n, pi_from_json(j.value("pi_prime", json("full")), n));
  if (fam == "elliptic")
    return ModelSpec::elliptic(n, complex_from_json(field(j, "omega1", "model")), complex_from_json(field(j, "omega2", "model")));
  throw ValidationError("model: unknown family \"" + fam + "\"");
}

json model_to_json(const ModelSpec& spec) {
  json j{{"N", spec.n()}, {"family", to_string(spec.family())}};
  switch (spec.family()) {
    case Family::rational: {
      json blocks = json::array();
      for (const auto& b : spec.subset().blocks()) {
        json bj = json::array();
        for (int i : b) bj.push_back(i + 1);
        blocks.push_back(std::move(bj));
      }
      j["delta_prime"] = json{{"blocks", blocks}};
      break;
    }
    case Family::trigonometric: {
      json pi = json::array();
      for (int a : spec.subset().raw().pi_members) pi.push_back(a + 1);
      j["pi_prime"] = pi;
      break;
    }
    case Family::elliptic:
      j["omega1"] = to_json(spec.lattice().omega1());
      j["omega2"] = to_json(spec.lattice().omega2());
      break;
  }
  return j;
}

double uniform_pm1(std::mt19937_64& rng) {
  return -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PhasePoint random_point(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = spec.n();
  const double span = spec.family() == Family::elliptic ? 1.3 : (spec.family() == Family::trigonometric ? 2.4 : 3.0);
  PhasePoint pt{Vec(n), Vec(n), Mat(n, n)};
  for (int i = 0; i < n; ++i) {
    const double base = -0.5 * span + span * (i + 0.5 + 0.15 * uniform_pm1(rng)) / n;
    const double qi = 0.1 * uniform_pm1(rng);
    pt.q(i) = cplx(base, qi);
    const double pr = uniform_pm1(rng);
    pt.p(i) = cplx(pr, 0.3 * uniform_pm1(rng));
    for (int k = 0; k < n; ++k) {
      const double re = uniform_pm1(rng);
      pt.xi(i, k) = cplx(re, uniform_pm1(rng));
    }
  }
  pt.q.array() -= pt.q.sum() / double(n);
  pt.p.array() -= pt.p.sum() / double(n);
  pt.xi.diagonal().setZero();
  return pt;
}

InitialData init_from_json(const json& j, const ModelSpec& spec, std::uint64_t seed) {
  if (!j.is_object()) throw ValidationError("init: expected an object");
  InitialData out;
  out.reduced = j.value("reduced", false);
  if (j.value("random", false)) {
    out.point = random_point(spec, j.value("seed", seed));
    if (out.reduced) out.point.xi = lie::reduce_point(spec.ctx(), out.point).s;
    return out;
  }
  const Vec q = vec_from_json(field(j, "q", "init"), "init.q");
  const Vec p = vec_from_json(field(j, "p", "init"), "init.p");
  const Mat m = mat_from_json(field(j, out.reduced ? "s" : "xi", "init"), out.reduced ? "init.s" : "init.xi");
  if (q.size() != spec.n() || p.size() != spec.n() || m.rows() != spec.n())
    throw ValidationError("init: dimensions do not match N = " + std::to_string(spec.n()));
  if (out.reduced) {
    const ReducedPoint r = make_reduced_point(q, p, m);
    out.point = {r.q, r.p, r.s};
  } else {
    out.point = {q, p, m};
    check_point(spec, out.point);
  }
  check_regular(spec, out.point.q);
  return out;
}

json init_to_json(const InitialData& init) {
  json j = point_json(init.point.q, init.point.p, init.reduced ? "s" : "xi", init.point.xi);
  if (init.reduced) j["reduced"] = true;
  return j;
}

std::vector<std::string> builtin_preset_names() {
  std::vector<std::string> names;
  for (const auto& p : builtin_presets()) names.push_back(p.name);
  return names;
}

Preset find_preset(const std::string& name) {
  if (const char* dir = std::getenv("SPINCM_PRESET_DIR"); dir && *dir) {
    const auto path = std::filesystem::path(dir) / (name + ".json");
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ValidationError("preset " + path.string() + ": " + e.what());
      }
      return {name, j.value("description", std::string()), field(j, "model", "preset"), field(j, "init", "preset")};
    }
  }
  for (const auto& p : builtin_presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : builtin_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ValidationError("unknown preset \"" + name + "\" (built-in: " + known + ")");
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CsvHeader& header,
                          const std::vector<std::pair<std::string, std::string>>& footer) {
  const int n = header.n;
  os << "# spincm " << version() << '\n'
     << "# command " << header.command << '\n'
     << "# config_hash " << header.config_hash << '\n'
     << "# seed " << header.seed << '\n'
     << "# provenance " << header.provenance << '\n'
     << "# N " << n << '\n'
     << "# reduced " << (header.reduced ? "true" : "false") << '\n';
  os << 't';
  for (const char* name : {"q", "p"})
    for (int i = 1; i <= n; ++i) os << ",re_" << name << '_' << i << ",im_" << name << '_' << i;
  const char* m = header.reduced ? "s" : "xi";
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= n; ++k) os << ",re_" << m << '_' << i << '_' << k << ",im_" << m << '_' << i << '_' << k;
  os << '\n';
  for (size_t r = 0; r < traj.size(); ++r) {
    const auto& s = traj.states[r];
    os << format_double(traj.times[r]);
    for (const Vec* v : {&s.q, &s.p})
      for (int i = 0; i < n; ++i) os << ',' << format_double((*v)(i).real()) << ',' << format_double((*v)(i).imag());
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) os << ',' << format_double(s.xi(i, k).real()) << ',' << format_double(s.xi(i, k).imag());
    os << '\n';
  }
  for (const auto& [key, value] : footer) os << "# " << key << ' ' << value << '\n';
}

namespace {

json mats(const std::vector<Mat>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(to_json(m));
  return a;
}

json vecs(const std::vector<Vec>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

json breakdown_json(const std::optional<Breakdown>& b) {
  if (!b) return nullptr;
  return {{"time", b->time}, {"gap", b->gap}, {"reason", b->reason}};
}

}  // namespace

json factors_to_json(const RationalFactorization& f) {
  return {{"family", "rational"},
          {"times", f.times},
          {"g", mats(f.g)},
          {"d", vecs(f.d)},
          {"h", vecs(f.h)},
          {"k", mats(f.k)},
          {"identity_residual", f.identity_residual},
          {"key_residual", f.key_residual},
          {"min_gap", f.min_gap},
          {"substeps", f.substeps},
          {"rejected", f.rejected},
          {"reanchors", f.reanchors},
          {"breakdown", breakdown_json(f.breakdown)}};
}

json factors_to_json(const TrigFactorization& f) {
  return {{"family", "trigonometric"},
          {"times", f.times},
          {"n_plus", mats(f.n_plus)},
          {"g_plus", mats(f.g_plus)},
          {"n_minus", mats(f.n_minus)},
          {"g_minus", mats(f.g_minus)},
          {"x", mats(f.x)},
          {"d", vecs(f.d)},
          {"h", vecs(f.h)},
          {"k", mats(f.k)},
          {"levi_residual", f.levi_residual},
          {"parabolic_residual", f.parabolic_residual},
          {"membership_defect", f.membership_defect},
          {"sign_mismatch", f.sign_mismatch},
          {"min_gap", f.min_gap},
          {"substeps", f.substeps},
          {"rejected", f.rejected},
          {"reanchors", f.reanchors},
          {"breakdown", breakdown_json(f.breakdown)}};
}

json invariant_report_to_json(const InvariantReport& rep) {
  json z = json::array();
  for (cplx s : rep.z_samples) z.push_back(to_json(s));
  json energy = json::array();
  for (cplx e : rep.energy) energy.push_back(to_json(e));
  return {{"times", rep.times},
          {"z_samples", z},
          {"energy", energy},
          {"energy_drift", rep.energy_drift},
          {"momentum_drift", rep.momentum_drift},
          {"spectrum_drift", rep.spectrum_drift}};
}

json branch_report_to_json(int n, const GenericityReport& gen, const std::optional<BranchReport>& rep) {
  json j{{"N", n},
         {"B", nullptr},
         {"genus", nullptr},
         {"expected_genus", (n * n - n + 2) / 2},
         {"ga1", gen.ga1_ok},
         {"ga1_min", gen.ga1_min},
         {"ga2", gen.ga2_ok},
         {"ga2_gap", gen.ga2_gap},
         {"grid", gen.grid}};
  if (!gen.details.empty()) j["details"] = gen.details;
  if (rep) {
    j["B"] = rep->branch_points;
    j["genus"] = rep->genus;
    j["matches_formula"] = rep->matches_formula;
    j["pole_order"] = rep->pole_order;
    j["count_grid"] = rep->grid;
    j["refined_cells"] = rep->refined_cells;
    j["attempts"] = rep->attempts;
  }
  return j;
}

std::vector<cplx> parse_complex_list(const std::string& text) {
  std::vector<cplx> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string s;
    for (char c : item)
      if (c != ' ') s += c;
    if (s.empty()) throw ValidationError("z-samples: empty entry in \"" + text + "\"");
    cplx z{0.0, 0.0};
    size_t pos = 0;
    bool any = false;
    while (pos < s.size()) {
      size_t used = 0;
      double v = 1.0;
      const bool imag_only = (s[pos] == 'i') || ((s[pos] == '+' || s[pos] == '-') && pos + 1 < s.size() && s[pos + 1] == 'i');
      if (imag_only) {
        v = s[pos] == '-' ? -1.0 : 1.0;
        used = s[pos] == 'i' ? 0 : 1;
      } else {
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          throw ValidationError("z-samples: cannot parse \"" + item + "\"");
        }
      }
      pos += used;
      if (pos < s.size() && s[pos] == 'i') {
        z += cplx(0.0, v);
        ++pos;
      } else {
        z += v;
      }
      any = true;
    }
    if (!any) throw ValidationError("z-samples: cannot parse \"" + item + "\"");
    out.push_back(z);
  }
  if (out.empty()) throw ValidationError("z-samples: empty list");
  return out;
}

}  // namespace spincm::io
