#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hydro::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarType { continuous, binary };
enum class RowSense { less_equal, equal, greater_equal };
enum class ObjectiveSense { minimize, maximize };

struct VarId {
  std::size_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

struct RowId {
  std::size_t index = 0;
  auto operator<=>(const RowId&) const = default;
};

struct Term {
  VarId var;
  double coeff = 0.0;
};

/// Affine expression sum(coeff * var) + constant.
struct LinearExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  void add(VarId var, double coeff) { terms.push_back({var, coeff}); }
  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr scaled(double factor) const;
  double evaluate(std::span<const double> values) const;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  VarType type = VarType::continuous;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::less_equal;
  double rhs = 0.0;
};

class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Backend-neutral LP/MILP. Variables and rows keep insertion order, so two
/// identical build sequences produce identical programs. Names are unique.
class LinearProgram {
 public:
  VarId add_variable(std::string name, double lower = 0.0, double upper = kInfinity,
                     VarType type = VarType::continuous);
  RowId add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  /// Moves the expression constant to the right-hand side.
  RowId add_constraint(std::string name, const LinearExpr& lhs, RowSense sense, double rhs);

  void set_sense(ObjectiveSense sense) { sense_ = sense; }
  ObjectiveSense sense() const { return sense_; }
  void add_objective(VarId var, double coeff) { objective_.at(var.index) += coeff; }
  void add_objective(const LinearExpr& expr, double weight = 1.0);
  void add_objective_constant(double value) { objective_constant_ += value; }

  void set_bounds(VarId var, double lower, double upper);
  void set_rhs(RowId row, double rhs) { rows_.at(row.index).rhs = rhs; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Variable& variable(VarId id) const { return vars_.at(id.index); }
  const Constraint& constraint(RowId id) const { return rows_.at(id.index); }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  bool has_integers() const;

  std::optional<VarId> find_variable(const std::string& name) const;
  std::optional<RowId> find_constraint(const std::string& name) const;

  /// Internal consistency problems (dangling terms, crossed bounds, bad
  /// binaries). Empty means the program can be dispatched.
  std::vector<std::string> check() const;

  double evaluate_objective(std::span<const double> values) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
  ObjectiveSense sense_ = ObjectiveSense::minimize;
  std::unordered_map<std::string, std::size_t> var_names_;
  std::unordered_map<std::string, std::size_t> row_names_;
};

enum class SolveStatus { optimal, infeasible, unbounded, limit };

const char* to_string(SolveStatus status);

struct SolveOptions {
  double mip_abs_gap = 0.0;
  double mip_rel_gap = 0.0;
  double integrality_tolerance = 1e-9;
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double time_limit = kInfinity;  // seconds
  std::int64_t mip_node_limit = -1;  // negative: no limit; deterministic, unlike time
  bool verbose = false;              // solver log on stdout
  /// Post-solve residual gates.
  double max_row_violation = 1e-6;
  double max_bound_violation = 1e-9;
};

/// Duals follow the sensitivity convention dual = d(objective)/d(rhs), so
/// under minimization duals of <= rows are <= 0 and of >= rows are >= 0.
/// Reduced costs follow the same convention for variable bounds.
struct SolveResult {
  SolveStatus status = SolveStatus::limit;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> duals;          // by row, pure LPs at optimality only
  std::vector<double> reduced_costs;  // by variable, same condition
  double seconds = 0.0;
  double max_row_violation = 0.0;
  double max_bound_violation = 0.0;
  double dual_objective = 0.0;  // b'y + bound terms, pure LPs only
  /// MIP only: best proven bound on the objective. Under a limit the primal
  /// holds the incumbent, if one was found, and objective its value.
  double objective_bound = 0.0;

  bool has_incumbent() const { return !primal.empty(); }

  bool optimal() const { return status == SolveStatus::optimal; }
  bool has_duals() const { return !duals.empty(); }
  double value(VarId var) const { return primal.at(var.index); }
  double value(const LinearExpr& expr) const { return expr.evaluate(primal); }
  double dual(RowId row) const { return duals.at(row.index); }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dispatches to the HiGHS backend. Inconsistent programs are rejected with
/// ModelError before dispatch; backend failures and residual-gate failures
/// raise SolverError.
SolveResult solve(const LinearProgram& program, const SolveOptions& options = {});

struct Residuals {
  double row = 0.0;    // max constraint violation
  double bound = 0.0;  // max bound/integrality violation
};

Residuals residuals(const LinearProgram& program, std::span<const double> values);

/// Primal values keyed by variable name.
std::unordered_map<std::string, double> named_values(const LinearProgram& program, const SolveResult& result);

/// Dual of a minimization LP with finite lower bounds or free columns.
/// For min c'x + k s.t. rows, l <= x <= u the result is
///   max b'y + l'zl - u'zu + k  s.t.  A'y + zl - zu = c,
/// with sign(y) fixed by the row sense and zl, zu >= 0. Zero lower bounds
/// fold zl into an inequality, infinite bounds drop the multiplier.
struct DualProgram {
  LinearProgram program;
  std::vector<VarId> row_dual;                   // one per primal row
  std::vector<std::optional<VarId>> upper_dual;  // per primal column with finite upper bound
  std::vector<std::optional<VarId>> lower_dual;  // per primal column with finite nonzero lower bound
  std::vector<RowId> column_row;                 // dual constraint per primal column
};

DualProgram dualize(const LinearProgram& primal);

/// Human readable CPLEX-LP text, for debugging only.
std::string to_lp_format(const LinearProgram& program);

/// Backend identification for --version output.
std::string backend_version();

}  // namespace hydro::lp
