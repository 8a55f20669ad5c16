#ifndef EVMT_IO_HPP
#define EVMT_IO_HPP

#include "evmt/groups.hpp"
#include "evmt/knockoff.hpp"
#include "evmt/lfdr.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evmt {

/// Columns recognised in an input CSV (header row required, any order):
///   pvalue        probability
///   evalue        nonnegative score (e-BH input)
///   group         nonempty label
///   truth         0 or 1
///   w1, w2        knockoff statistics
///   x*            real covariates, in header order
/// At least one of pvalue, evalue, w1 must be present.
struct InputTable {
  Index rows = 0;
  std::optional<PValueSet> pvals;
  std::optional<EValueSet> evalues;
  std::optional<GroupPartition> groups;
  std::optional<Truth> truth;
  std::optional<CovariateSet> covars;
  std::vector<std::string> covariate_names;
  std::optional<KnockoffStatSet> w1;
  std::optional<KnockoffStatSet> w2;
};

/// Errors name `source` and the one-based line.
InputTable parse_table(std::istream& in, const std::string& source = "input");
InputTable read_table(const std::filesystem::path& path);

/// One row per hypothesis; evalue/weight cells are empty when absent.
struct RejectionRows {
  std::vector<char> rejected;
  std::optional<Vector> evalues;
  std::optional<Vector> weights;

  Index size() const noexcept { return static_cast<Index>(rejected.size()); }
  RejectionSet rejection_set() const;
};

RejectionRows make_rows(Index n, const RejectionSet& rejected,
                        const std::optional<EValueSet>& evalues = std::nullopt,
                        const std::optional<Vector>& weights = std::nullopt);

/// Header `index,rejected,evalue,weight`.
void write_rejections(std::ostream& out, const RejectionRows& rows);
RejectionRows parse_rejections(std::istream& in, const std::string& source = "input");

}  // namespace evmt

#endif  // EVMT_IO_HPP
