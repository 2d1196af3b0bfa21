#pragma once

// Test problems and their reference solutions.

#include "rkx/integrator.hpp"
#include "rkx/reference_pairs.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkx {

enum class ReferencePolicy { analytic, bs5_tight };

struct ProblemSpec {
  std::string name;  ///< also the cache identity, e.g. "nbody:100:7"
  IVP ivp;
  std::map<std::string, double> constants;
  ReferencePolicy policy = ReferencePolicy::bs5_tight;
  std::function<State(double)> exact;  ///< analytic solution when policy is analytic
};

class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ------------------------------------------------------------------ problems

inline constexpr double kSb1Mu = 0.0121285627653123;
inline constexpr double kSb1Period = 6.192169331319639;

/// Restricted three-body problem in the rotating frame (a periodic orbit).
inline ProblemSpec sb1() {
  ProblemSpec p;
  p.name = "sb1";
  const double mu = kSb1Mu, mu1 = 1 - mu;
  p.constants = {{"mu", mu}, {"mu'", mu1}};
  p.ivp.name = p.name;
  p.ivp.dim = 4;
  p.ivp.y0 = {1.2, 0, 0, -1.049357509830319};
  p.ivp.t0 = 0;
  p.ivp.T = kSb1Period;
  p.ivp.f = [mu, mu1](std::span<const double> y, std::span<double> dy) {
    const double a = y[0] + mu, b = y[0] - mu1, y2 = y[1] * y[1];
    const double r1 = a * a + y2, r2 = b * b + y2;
    const double d1 = r1 * std::sqrt(r1), d2 = r2 * std::sqrt(r2);
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = y[0] + 2 * y[3] - mu1 * a / d1 - mu * b / d2;
    dy[3] = y[1] - 2 * y[2] - mu1 * y[1] / d1 - mu * y[1] / d2;
  };
  return p;
}

/// Two competing populations.
inline ProblemSpec b1() {
  ProblemSpec p;
  p.name = "b1";
  p.ivp.name = p.name;
  p.ivp.dim = 2;
  p.ivp.y0 = {1, 3};
  p.ivp.t0 = 0;
  p.ivp.T = 20;
  p.ivp.f = [](std::span<const double> y, std::span<double> dy) {
    const double prod = y[0] * y[1];
    dy[0] = 2 * (y[0] - prod);
    dy[1] = -(y[1] - prod);
  };
  return p;
}

/// y' = y, y(0) = 1.
inline ProblemSpec exponential(double T = 1) {
  ProblemSpec p;
  p.name = "exp";
  p.ivp.name = p.name;
  p.ivp.dim = 1;
  p.ivp.y0 = {1};
  p.ivp.T = T;
  p.ivp.f = [](std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
  p.policy = ReferencePolicy::analytic;
  p.exact = [](double t) { return State{std::exp(t)}; };
  return p;
}

/// y' = -y^3 + cos(tau) + (sin(tau) + 2)^3, tau' = 1; y = sin(t) + 2.
inline ProblemSpec cubic(double T = 1) {
  ProblemSpec p;
  p.name = "cubic";
  p.ivp.name = p.name;
  p.ivp.dim = 2;
  p.ivp.y0 = {2, 0};
  p.ivp.T = T;
  p.ivp.f = [](std::span<const double> y, std::span<double> dy) {
    const double s = std::sin(y[1]) + 2;
    dy[0] = -y[0] * y[0] * y[0] + std::cos(y[1]) + s * s * s;
    dy[1] = 1;
  };
  p.policy = ReferencePolicy::analytic;
  p.exact = [](double t) { return State{std::sin(t) + 2, t}; };
  return p;
}

struct NBodyConfig {
  std::size_t N = 100;
  std::uint64_t seed = 1;
  double softening = 1e-3;
  double T = 0.1;
};

inline std::vector<double> nbody_masses(const NBodyConfig& c) { return std::vector<double>(c.N, 1.0 / c.N); }

/// Positions uniform in the unit cube from mt19937_64 (53-bit mantissas),
/// zero velocities, shifted to zero total momentum. Layout: all positions,
/// then all velocities, 3 components each.
inline State nbody_initial_state(const NBodyConfig& c) {
  std::mt19937_64 rng(c.seed);
  State y(6 * c.N, 0.0);
  for (std::size_t k = 0; k < 3 * c.N; ++k) y[k] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const auto m = nbody_masses(c);
  double total = 0, mom[3] = {0, 0, 0};
  for (std::size_t i = 0; i < c.N; ++i) {
    total += m[i];
    for (int d = 0; d < 3; ++d) mom[d] += m[i] * y[3 * c.N + 3 * i + d];
  }
  for (std::size_t i = 0; i < c.N; ++i)
    for (int d = 0; d < 3; ++d) y[3 * c.N + 3 * i + d] -= mom[d] / total;
  return y;
}

inline void nbody_rhs(std::span<const double> y, std::span<double> dy, const std::vector<double>& m, double eps2) {
  const std::size_t N = m.size();
  const double* x = y.data();
  double* acc = dy.data() + 3 * N;
  for (std::size_t k = 0; k < 3 * N; ++k) dy[k] = y[3 * N + k];
  for (std::size_t k = 0; k < 3 * N; ++k) acc[k] = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const double dx = x[3 * j] - x[3 * i], dyy = x[3 * j + 1] - x[3 * i + 1], dz = x[3 * j + 2] - x[3 * i + 2];
      const double r2 = dx * dx + dyy * dyy + dz * dz + eps2;
      if (r2 == 0) throw std::domain_error("nbody: coincident bodies with zero softening");
      const double inv = 1 / (r2 * std::sqrt(r2));
      acc[3 * i] += m[j] * dx * inv;
      acc[3 * i + 1] += m[j] * dyy * inv;
      acc[3 * i + 2] += m[j] * dz * inv;
      acc[3 * j] -= m[i] * dx * inv;
      acc[3 * j + 1] -= m[i] * dyy * inv;
      acc[3 * j + 2] -= m[i] * dz * inv;
    }
  }
}

/// Kinetic minus (softened) potential energy.
inline double nbody_energy(std::span<const double> y, const std::vector<double>& m, double eps2) {
  const std::size_t N = m.size();
  double e = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double v2 = 0;
    for (int d = 0; d < 3; ++d) v2 += y[3 * N + 3 * i + d] * y[3 * N + 3 * i + d];
    e += 0.5 * m[i] * v2;
    for (std::size_t j = i + 1; j < N; ++j) {
      double r2 = eps2;
      for (int d = 0; d < 3; ++d) r2 += (y[3 * j + d] - y[3 * i + d]) * (y[3 * j + d] - y[3 * i + d]);
      e -= m[i] * m[j] / std::sqrt(r2);
    }
  }
  return e;
}

inline ProblemSpec nbody(const NBodyConfig& c) {
  if (c.N < 2) throw ProblemError("nbody needs at least two bodies");
  if (c.softening < 0) throw ProblemError("nbody softening must be >= 0");
  ProblemSpec p;
  std::ostringstream name;
  name << "nbody:" << c.N << ':' << c.seed;
  p.name = name.str();
  p.constants = {{"N", static_cast<double>(c.N)}, {"softening", c.softening}, {"G", 1}};
  p.ivp.name = p.name;
  p.ivp.dim = 6 * c.N;
  p.ivp.y0 = nbody_initial_state(c);
  p.ivp.T = c.T;
  auto m = nbody_masses(c);
  const double eps2 = c.softening * c.softening;
  p.ivp.f = [m, eps2](std::span<const double> y, std::span<double> dy) { nbody_rhs(y, dy, m, eps2); };
  return p;
}

/// sb1 | b1 | exp | cubic | nbody:N[:seed[:T]]. The --seed default applies
/// when the selector carries none.
inline ProblemSpec problem_by_name(const std::string& sel, std::uint64_t default_seed = 1) {
  if (sel == "sb1") return sb1();
  if (sel == "b1") return b1();
  if (sel == "exp") return exponential();
  if (sel == "cubic") return cubic();
  if (sel.rfind("nbody", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(sel);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts[0] != "nbody" || parts.size() > 4) throw ProblemError("bad nbody selector '" + sel + "'");
    NBodyConfig c;
    c.seed = default_seed;
    try {
      if (parts.size() > 1) c.N = std::stoul(parts[1]);
      if (parts.size() > 2) c.seed = std::stoull(parts[2]);
      if (parts.size() > 3) c.T = std::stod(parts[3]);
    } catch (const std::exception&) {
      throw ProblemError("bad nbody selector '" + sel + "' (expected nbody:N[:seed[:T]])");
    }
    return nbody(c);
  }
  throw ProblemError("unknown problem '" + sel + "' (sb1, b1, exp, cubic, nbody:N[:seed[:T]])");
}

// -------------------------------------------------------------- references

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Cache key: problem identity (name, final time and initial data bits).
inline std::string reference_key(const ProblemSpec& p) {
  std::ostringstream key;
  key << p.name << '|' << std::hexfloat << p.ivp.T;
  std::uint64_t h = 0;
  for (double v : p.ivp.y0) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = h * 1099511628211ULL ^ bits;
  }
  key << '|' << std::hex << h;
  return key.str();
}

inline constexpr double kReferenceTolerance = 1e-13;

namespace detail {

inline std::map<std::string, State>& reference_memo() {
  static std::map<std::string, State> memo;
  return memo;
}

inline std::mutex& reference_mutex() {
  static std::mutex m;
  return m;
}

inline std::optional<State> read_reference_file(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string key_line;
  std::getline(in, key_line);
  State y;
  for (std::string tok; in >> tok;) y.push_back(std::strtod(tok.c_str(), nullptr));
  if (y.size() != dim) return std::nullopt;
  return y;
}

inline void write_reference_file(const std::filesystem::path& path, const std::string& key, const State& y) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "# " << key << '\n';
  char buf[64];
  for (double v : y) {
    std::snprintf(buf, sizeof buf, "%a", v);
    out << buf << '\n';
  }
}

}  // namespace detail

/// y(T): analytic when known, otherwise bs5(4) at tolerance 1e-13. Results
/// are memoized per process and, with a cache directory, stored as
/// <dir>/<fnv1a(key)>.ref in hexadecimal floating point (bit exact).
inline State reference_solution(const ProblemSpec& p, const std::filesystem::path& cache_dir = {}) {
  if (p.policy == ReferencePolicy::analytic) return p.exact(p.ivp.T);
  const auto key = reference_key(p);
  std::lock_guard lock(detail::reference_mutex());
  auto& memo = detail::reference_memo();
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  std::filesystem::path file;
  if (!cache_dir.empty()) {
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.ref", static_cast<unsigned long long>(fnv1a(key)));
    file = cache_dir / name;
    if (auto cached = detail::read_reference_file(file, p.ivp.dim)) return memo[key] = *cached;
  }

  static const EmbeddedMethod bs5 = load_reference_pair("bs5(4)");
  ControllerConfig cfg;
  cfg.epsilon = kReferenceTolerance;
  cfg.h0 = (p.ivp.T - p.ivp.t0) * 1e-4;
  IVP ivp = p.ivp;
  ivp.reference = nullptr;
  const auto run = integrate(bs5, ivp, cfg);
  if (run.record.status != RunStatus::ok)
    throw std::runtime_error("reference solution for " + p.name + " failed: " + run.record.message);
  if (!file.empty()) detail::write_reference_file(file, key, run.record.final_state);
  return memo[key] = run.record.final_state;
}

/// Attaches the reference policy to the problem's IVP.
inline void attach_reference(ProblemSpec& p, const std::filesystem::path& cache_dir = {}) {
  if (p.policy == ReferencePolicy::analytic) {
    auto exact = p.exact;
    const double T = p.ivp.T;
    p.ivp.reference = [exact, T] { return exact(T); };
  } else {
    ProblemSpec copy = p;
    p.ivp.reference = [copy, cache_dir] { return reference_solution(copy, cache_dir); };
  }
}

}  // namespace rkx
