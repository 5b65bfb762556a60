#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "credo/audit.hpp"
#include "credo/logic/formula.hpp"
#include "credo/logic/registry.hpp"
#include "credo/logic/world.hpp"

namespace credo::accuracy {

inline constexpr double kProjectionTolerance = 1e-7;
inline constexpr std::size_t kMaxIterations = 10000;

using Vector = std::vector<double>;

// Distinct truth-value tuples (tv(p_1), ..., tv(p_n)) over the worlds of a
// registry, in lexicographic order, with the number of worlds behind each.
struct WorldVectorSet {
  std::vector<logic::Formula> formulas;
  std::vector<Vector> vectors;
  std::vector<std::uint64_t> world_counts;

  std::size_t dimension() const noexcept { return formulas.size(); }
  std::size_t size() const noexcept { return vectors.size(); }
};

// Throws CapExceeded when the registry is larger than `cap`.
WorldVectorSet world_vectors(std::span<const logic::Formula> formulas, const logic::AtomRegistry& registry,
                             std::size_t cap = logic::kDefaultWorldCap);

struct CredenceVector {
  std::vector<logic::Formula> formulas;
  Vector values;
};

// Sum of squared differences, not the mean. Throws DimensionMismatch.
double brier_score(std::span<const double> c, std::span<const double> v);
double brier_score(const CredenceVector& c, std::span<const double> v);

struct ProjectionOptions {
  double epsilon = kProjectionTolerance;
  std::size_t max_iterations = kMaxIterations;
};

struct Projection {
  Vector point;
  double distance = 0.0;  // ||c - point||
  double gap = 0.0;       // Frank-Wolfe duality gap at `point`
  std::size_t iterations = 0;
  // distance <= epsilon; then `point` is c itself
  bool coherent = false;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(Projection best, std::size_t max_iterations);
  const Projection& best() const noexcept { return best_; }

 private:
  Projection best_;
};

// Euclidean projection of c onto the convex hull of W.vectors, by
// Frank-Wolfe with away steps and exact line search, started from the
// nearest vertex. Stops once the duality gap is at most epsilon^2 / 4, which
// puts the iterate within epsilon / sqrt(2) of the true projection.
Projection project_to_coherent(std::span<const double> c, const WorldVectorSet& w,
                               const ProjectionOptions& options = {});

struct BrierPair {
  Vector vertex;
  std::uint64_t world_count = 0;
  double original = 0.0;
  double projected = 0.0;
};

struct DominanceCertificate {
  CredenceVector original;
  CredenceVector projected;
  std::vector<BrierPair> pairs;
  bool strictly_dominates = false;
  double hull_distance = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  // Run metadata stamped by the CLI.
  std::string lexicon_name;
  std::string backend_id;
  std::string config_digest;
  std::optional<std::int64_t> seed;
};

// strictly_dominates holds iff the hull distance exceeds epsilon and the
// projection scores strictly better at every distinct world vector.
DominanceCertificate dominance_certificate(const CredenceVector& c, const WorldVectorSet& w,
                                           const ProjectionOptions& options = {});

nlohmann::json to_json(const DominanceCertificate& cert);
std::string render_table(const DominanceCertificate& cert);

// Credence vector over the formulas of cf that have a defined credence, in
// cf order. With `require_all`, a missing credence throws MissingValue.
CredenceVector credence_vector(const audit::CredenceFunction& cf, bool require_all = true);

// Brier score of cf against a truth assignment to its probed formulas. The
// assignment must be realizable by some world (InconsistentTruth) and cover
// every formula with a defined credence (MissingValue); undefined credences
// also raise MissingValue.
double score_against_truth(const audit::CredenceFunction& cf, const std::map<logic::Formula, bool>& truth);

}  // namespace credo::accuracy
