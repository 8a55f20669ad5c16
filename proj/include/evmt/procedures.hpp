#ifndef EVMT_PROCEDURES_HPP
#define EVMT_PROCEDURES_HPP

#include "evmt/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace evmt {

enum class Procedure { BH, Storey, BC, FBC };

/// Monotone increasing map p -> phi(p) used by the flexible BC procedure.
using RejectionMap = std::function<double(double)>;

/// Configuration of a procedure in the unified threshold family
///   T = sup{ t : m(t) / (1 v sum_i R_i(t)) <= alpha }.
struct ProcedureSpec {
  Procedure kind = Procedure::BH;
  double alpha = 0.05;
  double storey_lambda = 0.5;                    // Storey only
  std::vector<RejectionMap> rejection_functions;  // FBC only, one per hypothesis
  double t_upper = 0.0;                           // FBC only

  /// Throws ConfigError when the spec cannot be applied to n hypotheses.
  void validate(Index n) const;
};

ProcedureSpec bh_spec(double alpha);
ProcedureSpec storey_spec(double alpha, double lambda = 0.5);
ProcedureSpec bc_spec(double alpha);
ProcedureSpec fbc_spec(double alpha, std::vector<RejectionMap> phi,
                       double t_upper);

/// Solves the unified threshold equation on the finite jump grid.
///
/// BH and Storey report the plateau supremum k*alpha/(n*pi0) (capped at 1),
/// which is the continuum supremum and keeps n/m(T) on the same scale as the
/// e-BH cutoffs. BC uses the grid {p_i, 1 - p_i} restricted to [0, 1/2); FBC
/// uses {phi_i(p_i), phi_i(1 - p_i)} restricted to (0, t_upper].
ThresholdResult solve_threshold(const PValueSet& pvals,
                                const ProcedureSpec& spec);

/// pi0 = (1 + n - #{p <= lambda}) / ((1 - lambda) n).
double storey_pi0(const PValueSet& pvals, double lambda);

/// e_i = n R_i(T) / m(T); all zeros when the threshold is infeasible.
EValueSet procedure_to_evalues(const PValueSet& pvals,
                               const ProcedureSpec& spec,
                               const ThresholdResult& result);

/// e-BH cutoff for the i-th largest of n e-values (i is one-based).
inline double ebh_cutoff(Index n, Index i, double alpha) {
  return static_cast<double>(n) / (static_cast<double>(i) * alpha);
}

/// Rejects the k largest e-values with k = max{ i : e_(i) >= n / (i alpha) }.
/// Every hypothesis tied with e_(k) is rejected.
RejectionSet ebh_select(const EValueSet& evals, double alpha);

struct FdpPower {
  double fdp = 0.0;
  double power = 0.0;
};

/// FDP = false / (1 v rejections), power = true / (1 v non-nulls).
FdpPower fdp_power(const RejectionSet& rejected, const Truth& truth);

/// Same metrics restricted to the hypotheses listed in `members`.
FdpPower fdp_power(const RejectionSet& rejected, const Truth& truth,
                   std::span<const Index> members);

}  // namespace evmt

#endif  // EVMT_PROCEDURES_HPP
