#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qrw/table.hpp"

namespace qrw {

// A matched rewrite site: the rows that must be locked and the replacement
// program to run once they are. Plans are built against a snapshot and
// revalidated against the transaction view after locking.
struct RewritePlan {
  std::vector<uint64_t> locks;  // sorted, deduplicated
  std::function<void(Transaction &)> apply;
};

class RewriteTemplate {
 public:
  virtual ~RewriteTemplate() = default;
  virtual std::string name() const = 0;
  // Gate types whose index buckets together cover every possible anchor.
  virtual std::vector<GateType> index_types() const = 0;
  // Candidate anchors reachable from one index hit (usually just the hit).
  virtual std::vector<uint64_t> anchors_for(const GateView &view,
                                            uint64_t hit) const {
    (void)view;
    return {hit};
  }
  // Match at the anchor; nullopt if the pattern is not present.
  virtual std::optional<RewritePlan> plan(const GateView &view,
                                          uint64_t anchor,
                                          std::mt19937_64 *rng) const = 0;
};

// Attempt one rewrite at the anchor: plan on committed state, try-lock,
// revalidate, apply, commit. Returns false on no-match; lock_failed reports
// a lost race (skip-on-conflict, never retried here).
struct ApplyResult {
  bool applied = false;
  bool matched = false;
  bool lock_failed = false;
};
ApplyResult try_rewrite(CircuitTable &table, const RewriteTemplate &tmpl,
                        uint64_t anchor, std::mt19937_64 &rng);

// The built-in rule catalog. Forward rules: a (inverse-pair cancellation),
// b (CNOT pair cancellation), c (diagonal gate commutes past a CNOT
// control), d (X-axis gate commutes past a CNOT target), e/f (same-axis
// rotation merge), g (H-surrounded CNOT reversal), plus toffoli/cswap
// Clifford+T decompositions. "-rev" names the reverse direction.
const RewriteTemplate *find_template(const std::string &name);
std::vector<const RewriteTemplate *> all_templates();
std::vector<const RewriteTemplate *> parse_template_list(
    const std::string &comma_separated);

// Clifford+T networks used by the decomposition rules and the ingestion
// pipeline. Wire order matches the gate's slots.
std::vector<GateSpec> toffoli_clifford_t(int c1, int c2, int target);
std::vector<GateSpec> cswap_clifford_t(int ctrl, int t1, int t2);

// Angle tolerance for rotation cancellation.
constexpr double kAngleTol = 1e-12;

}  // namespace qrw
