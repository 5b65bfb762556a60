#include "credo/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "credo/exact.hpp"
#include "credo/logic/sat.hpp"

namespace credo::accuracy {

using logic::Formula;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string format_vector(std::span<const double> v) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << std::setprecision(6) << v[i];
  out << ")";
  return out.str();
}

}  // namespace

WorldVectorSet world_vectors(std::span<const Formula> formulas, const logic::AtomRegistry& registry, std::size_t cap) {
  const auto worlds = logic::enumerate_worlds(registry, cap);
  std::vector<logic::CompiledFormula> compiled;
  for (const auto& f : formulas) {
    logic::require_registered(f, registry);
    compiled.emplace_back(f, registry);
  }
  std::map<std::vector<char>, std::uint64_t> seen;
  std::vector<char> key(formulas.size());
  for (std::uint64_t w = 0; w < worlds.size(); ++w) {
    for (std::size_t i = 0; i < compiled.size(); ++i) key[i] = compiled[i].evaluate(w) ? 1 : 0;
    ++seen[key];
  }
  WorldVectorSet out{{formulas.begin(), formulas.end()}, {}, {}};
  for (const auto& [k, count] : seen) {
    out.vectors.emplace_back(k.begin(), k.end());
    out.world_counts.push_back(count);
  }
  return out;
}

double brier_score(std::span<const double> c, std::span<const double> v) {
  if (c.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "credence vector has " + std::to_string(c.size()) +
                                                  " entries, world vector " + std::to_string(v.size()));
  Exact s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Exact d = exact_from_double(v[i]) - exact_from_double(c[i]);
    s += d * d;
  }
  return to_double(s);
}

double brier_score(const CredenceVector& c, std::span<const double> v) { return brier_score(c.values, v); }

NonConvergenceError::NonConvergenceError(Projection best, std::size_t max_iterations)
    : Error(ErrorCode::NonConvergence, "projection did not converge in " + std::to_string(max_iterations) +
                                           " iterations (duality gap " + std::to_string(best.gap) + ")"),
      best_(std::move(best)) {}

Projection project_to_coherent(std::span<const double> c, const WorldVectorSet& w, const ProjectionOptions& options) {
  const std::size_t n = w.dimension();
  if (c.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "credence vector has " + std::to_string(c.size()) + " entries, " +
                                                  std::to_string(n) + " formulas");
  if (w.vectors.empty()) throw Error(ErrorCode::EmptyInput, "no world vectors");
  const auto& vs = w.vectors;
  const std::size_t m = vs.size();
  const double target_gap = options.epsilon * options.epsilon / 4;

  // Convex weights over the vertices; `active` lists those with weight > 0.
  std::vector<double> alpha(m, 0.0);
  std::vector<std::size_t> active;
  std::size_t start = 0;
  for (std::size_t k = 1; k < m; ++k)
    if (distance(vs[k], c) < distance(vs[start], c)) start = k;
  alpha[start] = 1.0;
  active.push_back(start);

  Vector x = vs[start], g(n), d(n);
  Projection best{x, distance(x, c), std::numeric_limits<double>::infinity(), 0, false};
  auto finish = [&](Projection p) {
    if (p.distance <= options.epsilon) {
      p.point.assign(c.begin(), c.end());
      p.coherent = true;
    }
    return p;
  };

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) g[i] = x[i] - c[i];

    std::size_t s = 0;
    double gs = dot(g, vs[0]);
    for (std::size_t k = 1; k < m; ++k)
      if (double v = dot(g, vs[k]); v < gs) gs = v, s = k;
    std::size_t a = active.front();
    double ga = dot(g, vs[a]);
    for (std::size_t k : active)
      if (double v = dot(g, vs[k]); v > ga) ga = v, a = k;

    const double gx = dot(g, x);
    const double gap = gx - gs;
    const double dist = distance(x, c);
    if (dist < best.distance || (dist == best.distance && gap < best.gap)) best = {x, dist, gap, it, false};
    if (gap <= target_gap) return finish({x, dist, gap, it, false});

    const bool toward = gap >= ga - gx;
    double gamma_max;
    if (toward) {
      for (std::size_t i = 0; i < n; ++i) d[i] = vs[s][i] - x[i];
      gamma_max = 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - vs[a][i];
      gamma_max = alpha[a] / (1.0 - alpha[a]);
    }
    const double dd = dot(d, d);
    if (dd == 0.0) return finish({x, dist, gap, it, false});
    const double gamma = std::clamp(-dot(g, d) / dd, 0.0, gamma_max);

    if (toward) {
      if (gamma == 1.0) {
        for (std::size_t k : active) alpha[k] = 0.0;
        active.clear();
        alpha[s] = 1.0;
      } else {
        for (std::size_t k : active) alpha[k] *= 1.0 - gamma;
        alpha[s] += gamma;
      }
      if (std::find(active.begin(), active.end(), s) == active.end()) active.push_back(s);
    } else {
      for (std::size_t k : active) alpha[k] *= 1.0 + gamma;
      alpha[a] -= gamma;
      if (gamma == gamma_max) alpha[a] = 0.0;  // drop step
    }
    std::erase_if(active, [&](std::size_t k) { return alpha[k] <= 0.0; });
    std::sort(active.begin(), active.end());

    // Rebuild x from the weights so rounding does not accumulate.
    const double total = std::accumulate(active.begin(), active.end(), 0.0,
                                         [&](double acc, std::size_t k) { return acc + alpha[k]; });
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k : active) {
      alpha[k] /= total;
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha[k] * vs[k][i];
    }
  }
  best.iterations = options.max_iterations;
  if (best.distance <= options.epsilon) return finish(best);
  throw NonConvergenceError(std::move(best), options.max_iterations);
}

DominanceCertificate dominance_certificate(const CredenceVector& c, const WorldVectorSet& w,
                                           const ProjectionOptions& options) {
  const Projection p = project_to_coherent(c.values, w, options);
  DominanceCertificate cert;
  cert.original = c;
  cert.projected = {c.formulas, p.point};
  cert.hull_distance = p.distance;
  cert.gap = p.gap;
  cert.iterations = p.iterations;
  bool strict = !p.coherent;
  for (std::size_t k = 0; k < w.size(); ++k) {
    BrierPair pair{w.vectors[k], w.world_counts[k], brier_score(c.values, w.vectors[k]),
                   brier_score(p.point, w.vectors[k])};
    strict = strict && pair.projected < pair.original;
    cert.pairs.push_back(std::move(pair));
  }
  cert.strictly_dominates = strict;
  return cert;
}

nlohmann::json to_json(const DominanceCertificate& cert) {
  using nlohmann::json;
  json formulas = json::array();
  for (const auto& f : cert.original.formulas) formulas.push_back(logic::to_string(f));
  json pairs = json::array();
  for (const auto& p : cert.pairs)
    pairs.push_back({{"world_vector", p.vertex},
                     {"world_count", p.world_count},
                     {"brier_original", p.original},
                     {"brier_projected", p.projected}});
  return {
      {"formulas", formulas},
      {"original", cert.original.values},
      {"projected", cert.projected.values},
      {"hull_distance", cert.hull_distance},
      {"duality_gap", cert.gap},
      {"iterations", cert.iterations},
      {"strictly_dominates", cert.strictly_dominates},
      {"brier", pairs},
      {"lexicon", cert.lexicon_name},
      {"backend_id", cert.backend_id},
      {"config_digest", cert.config_digest},
      {"seed", cert.seed ? json(*cert.seed) : json(nullptr)},
  };
}

std::string render_table(const DominanceCertificate& cert) {
  std::ostringstream out;
  out << "formulas:";
  for (const auto& f : cert.original.formulas) out << " " << logic::to_string(f);
  out << "\noriginal:  " << format_vector(cert.original.values) << "\nprojected: "
      << format_vector(cert.projected.values) << "\nhull distance: " << std::setprecision(9) << cert.hull_distance
      << "\n\n"
      << std::left << std::setw(24) << "world vector" << std::setw(8) << "worlds" << std::setw(16) << "BR original"
      << "BR projected\n";
  for (const auto& p : cert.pairs)
    out << std::left << std::setw(24) << format_vector(p.vertex) << std::setw(8) << p.world_count << std::setw(16)
        << std::setprecision(9) << p.original << p.projected << "\n";
  out << "strictly dominated: " << (cert.strictly_dominates ? "yes" : "no") << "\n";
  return out.str();
}

CredenceVector credence_vector(const audit::CredenceFunction& cf, bool require_all) {
  CredenceVector out;
  for (const auto& f : cf.formulas()) {
    const auto c = cf.try_credence(f);
    if (!c) {
      if (require_all)
        throw Error(ErrorCode::MissingValue, "credence for '" + logic::to_string(f) + "' is undefined");
      continue;
    }
    out.formulas.push_back(f);
    out.values.push_back(*c);
  }
  return out;
}

double score_against_truth(const audit::CredenceFunction& cf, const std::map<Formula, bool>& truth) {
  std::vector<Formula> literals;
  for (const auto& [f, v] : truth) literals.push_back(v ? f : logic::negate(f));
  if (!logic::is_satisfiable(literals).satisfiable) {
    std::string core;
    for (const auto& f : logic::minimal_unsatisfiable_subset(literals))
      core += (core.empty() ? "" : ", ") + logic::to_string(f);
    throw Error(ErrorCode::InconsistentTruth, "no world makes {" + core + "} true");
  }
  const CredenceVector c = credence_vector(cf);
  Vector tv;
  for (const auto& f : c.formulas) {
    auto it = truth.find(f);
    if (it == truth.end())
      throw Error(ErrorCode::MissingValue, "no truth value for '" + logic::to_string(f) + "'");
    tv.push_back(it->second ? 1.0 : 0.0);
  }
  return brier_score(c.values, tv);
}

}  // namespace credo::accuracy
