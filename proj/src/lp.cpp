#include "hydro/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "Highs.h"
#include "hydro/csv.hpp"

namespace hydro::lp {

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinearExpr LinearExpr::scaled(double factor) const {
  LinearExpr out = *this;
  for (auto& t : out.terms) t.coeff *= factor;
  out.constant *= factor;
  return out;
}

double LinearExpr::evaluate(std::span<const double> values) const {
  double total = constant;
  for (const auto& t : terms) total += t.coeff * values[t.var.index];
  return total;
}

VarId LinearProgram::add_variable(std::string name, double lower, double upper, VarType type) {
  const std::size_t index = vars_.size();
  if (!var_names_.emplace(name, index).second) throw ModelError("duplicate variable name '" + name + "'");
  vars_.push_back({std::move(name), lower, upper, type});
  objective_.push_back(0.0);
  return VarId{index};
}

RowId LinearProgram::add_constraint(std::string name, std::vector<Term> terms, RowSense sense, double rhs) {
  const std::size_t index = rows_.size();
  if (!row_names_.emplace(name, index).second) throw ModelError("duplicate constraint name '" + name + "'");
  rows_.push_back({std::move(name), std::move(terms), sense, rhs});
  return RowId{index};
}

RowId LinearProgram::add_constraint(std::string name, const LinearExpr& lhs, RowSense sense, double rhs) {
  return add_constraint(std::move(name), lhs.terms, sense, rhs - lhs.constant);
}

void LinearProgram::add_objective(const LinearExpr& expr, double weight) {
  for (const auto& t : expr.terms) objective_.at(t.var.index) += weight * t.coeff;
  objective_constant_ += weight * expr.constant;
}

void LinearProgram::set_bounds(VarId var, double lower, double upper) {
  auto& v = vars_.at(var.index);
  v.lower = lower;
  v.upper = upper;
}

bool LinearProgram::has_integers() const {
  return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.type == VarType::binary; });
}

std::optional<VarId> LinearProgram::find_variable(const std::string& name) const {
  auto it = var_names_.find(name);
  if (it == var_names_.end()) return std::nullopt;
  return VarId{it->second};
}

std::optional<RowId> LinearProgram::find_constraint(const std::string& name) const {
  auto it = row_names_.find(name);
  if (it == row_names_.end()) return std::nullopt;
  return RowId{it->second};
}

std::vector<std::string> LinearProgram::check() const {
  std::vector<std::string> out;
  for (const auto& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper)) out.push_back("variable " + v.name + ": NaN bound");
    if (v.lower > v.upper) out.push_back("variable " + v.name + ": lower bound above upper bound");
    if (v.type == VarType::binary && (v.lower < 0.0 || v.upper > 1.0))
      out.push_back("variable " + v.name + ": binary bounds outside [0,1]");
  }
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) out.push_back("constraint " + r.name + ": non-finite rhs");
    for (const auto& t : r.terms) {
      if (t.var.index >= vars_.size()) {
        out.push_back("constraint " + r.name + ": references undeclared variable");
        break;
      }
      if (!std::isfinite(t.coeff)) out.push_back("constraint " + r.name + ": non-finite coefficient");
    }
  }
  for (std::size_t j = 0; j < objective_.size(); ++j)
    if (!std::isfinite(objective_[j])) out.push_back("objective: non-finite coefficient on " + vars_[j].name);
  return out;
}

double LinearProgram::evaluate_objective(std::span<const double> values) const {
  double total = objective_constant_;
  for (std::size_t j = 0; j < objective_.size(); ++j) total += objective_[j] * values[j];
  return total;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::limit:
      return "limit";
  }
  return "unknown";
}

Residuals residuals(const LinearProgram& program, std::span<const double> values) {
  Residuals res;
  const auto& vars = program.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double x = values[j];
    res.bound = std::max({res.bound, vars[j].lower - x, x - vars[j].upper});
    if (vars[j].type == VarType::binary) res.bound = std::max(res.bound, std::abs(x - std::round(x)));
  }
  for (const auto& row : program.constraints()) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coeff * values[t.var.index];
    double viol = 0.0;
    switch (row.sense) {
      case RowSense::less_equal:
        viol = lhs - row.rhs;
        break;
      case RowSense::greater_equal:
        viol = row.rhs - lhs;
        break;
      case RowSense::equal:
        viol = std::abs(lhs - row.rhs);
        break;
    }
    res.row = std::max(res.row, viol);
  }
  return res;
}

std::unordered_map<std::string, double> named_values(const LinearProgram& program, const SolveResult& result) {
  std::unordered_map<std::string, double> out;
  out.reserve(program.num_variables());
  for (std::size_t j = 0; j < program.num_variables(); ++j) out.emplace(program.variables()[j].name, result.primal[j]);
  return out;
}

namespace {

HighsLp to_highs(const LinearProgram& program) {
  HighsLp lp;
  const auto& vars = program.variables();
  const auto& rows = program.constraints();
  const auto nc = static_cast<HighsInt>(vars.size());
  const auto nr = static_cast<HighsInt>(rows.size());
  lp.num_col_ = nc;
  lp.num_row_ = nr;
  lp.sense_ = program.sense() == ObjectiveSense::minimize ? ObjSense::kMinimize : ObjSense::kMaximize;
  lp.offset_ = program.objective_constant();
  lp.col_cost_ = program.objective();
  lp.col_lower_.resize(nc);
  lp.col_upper_.resize(nc);
  bool integer = false;
  std::vector<HighsVarType> integrality(nc, HighsVarType::kContinuous);
  for (HighsInt j = 0; j < nc; ++j) {
    lp.col_lower_[j] = std::isinf(vars[j].lower) ? -kHighsInf : vars[j].lower;
    lp.col_upper_[j] = std::isinf(vars[j].upper) ? kHighsInf : vars[j].upper;
    if (vars[j].type == VarType::binary) {
      integrality[j] = HighsVarType::kInteger;
      integer = true;
    }
  }
  if (integer) lp.integrality_ = std::move(integrality);

  lp.row_lower_.resize(nr);
  lp.row_upper_.resize(nr);
  // Row-wise assembly; duplicate terms within a row are summed.
  std::vector<HighsInt> start(1, 0);
  std::vector<HighsInt> index;
  std::vector<double> value;
  std::vector<double> dense(nc, 0.0);
  std::vector<char> seen(nc, 0);
  std::vector<HighsInt> touched;
  for (HighsInt i = 0; i < nr; ++i) {
    const auto& row = rows[i];
    switch (row.sense) {
      case RowSense::less_equal:
        lp.row_lower_[i] = -kHighsInf;
        lp.row_upper_[i] = row.rhs;
        break;
      case RowSense::greater_equal:
        lp.row_lower_[i] = row.rhs;
        lp.row_upper_[i] = kHighsInf;
        break;
      case RowSense::equal:
        lp.row_lower_[i] = row.rhs;
        lp.row_upper_[i] = row.rhs;
        break;
    }
    touched.clear();
    for (const auto& t : row.terms) {
      const auto j = static_cast<HighsInt>(t.var.index);
      if (!seen[j]) {
        seen[j] = 1;
        touched.push_back(j);
      }
      dense[j] += t.coeff;
    }
    std::sort(touched.begin(), touched.end());
    for (auto j : touched) {
      if (dense[j] != 0.0) {
        index.push_back(j);
        value.push_back(dense[j]);
      }
      dense[j] = 0.0;
      seen[j] = 0;
    }
    start.push_back(static_cast<HighsInt>(index.size()));
  }
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.num_col_ = nc;
  lp.a_matrix_.num_row_ = nr;
  lp.a_matrix_.start_ = std::move(start);
  lp.a_matrix_.index_ = std::move(index);
  lp.a_matrix_.value_ = std::move(value);
  return lp;
}

void configure(Highs& highs, const SolveOptions& options) {
  highs.setOptionValue("output_flag", options.verbose);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("random_seed", 0);
  highs.setOptionValue("mip_abs_gap", options.mip_abs_gap);
  highs.setOptionValue("mip_rel_gap", options.mip_rel_gap);
  highs.setOptionValue("mip_feasibility_tolerance", options.integrality_tolerance);
  highs.setOptionValue("primal_feasibility_tolerance", options.primal_tolerance);
  highs.setOptionValue("dual_feasibility_tolerance", options.dual_tolerance);
  if (std::isfinite(options.time_limit)) highs.setOptionValue("time_limit", options.time_limit);
  if (options.mip_node_limit >= 0) highs.setOptionValue("mip_max_nodes", static_cast<HighsInt>(options.mip_node_limit));
}

SolveStatus map_status(HighsModelStatus status) {
  switch (status) {
    case HighsModelStatus::kOptimal:
      return SolveStatus::optimal;
    case HighsModelStatus::kInfeasible:
      return SolveStatus::infeasible;
    case HighsModelStatus::kUnbounded:
      return SolveStatus::unbounded;
    case HighsModelStatus::kTimeLimit:
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kObjectiveBound:
    case HighsModelStatus::kObjectiveTarget:
    case HighsModelStatus::kInterrupt:
      return SolveStatus::limit;
    default:
      throw SolverError(std::string("solver backend failure: ") + Highs().modelStatusToString(status));
  }
}

}  // namespace

SolveResult solve(const LinearProgram& program, const SolveOptions& options) {
  if (auto issues = program.check(); !issues.empty()) {
    std::string msg = "inconsistent linear program:";
    for (std::size_t i = 0; i < std::min<std::size_t>(issues.size(), 5); ++i) msg += "\n  " + issues[i];
    throw ModelError(msg);
  }

  const auto started = std::chrono::steady_clock::now();
  Highs highs;
  configure(highs, options);
  if (highs.passModel(to_highs(program)) == HighsStatus::kError) throw SolverError("solver rejected the model");
  if (highs.run() == HighsStatus::kError) throw SolverError("solver run failed");

  auto model_status = highs.getModelStatus();
  if (model_status == HighsModelStatus::kUnboundedOrInfeasible) {
    // Presolve cannot tell the two apart; the simplex without presolve can.
    highs.setOptionValue("presolve", "off");
    highs.clearSolver();
    if (highs.run() == HighsStatus::kError) throw SolverError("solver run failed");
    model_status = highs.getModelStatus();
    if (model_status == HighsModelStatus::kUnboundedOrInfeasible) model_status = HighsModelStatus::kInfeasible;
  }

  SolveResult result;
  result.status = map_status(model_status);
  const bool integer = program.has_integers();
  const auto& solution = highs.getSolution();
  const auto& vars = program.variables();

  if (solution.value_valid) {
    result.primal = solution.col_value;
    // Snap to bounds and integrality; larger discrepancies are caught below.
    for (std::size_t j = 0; j < vars.size(); ++j) {
      double& x = result.primal[j];
      if (vars[j].type == VarType::binary && std::abs(x - std::round(x)) <= options.integrality_tolerance * 10)
        x = std::round(x);
      if (x < vars[j].lower && vars[j].lower - x <= options.max_row_violation) x = vars[j].lower;
      if (x > vars[j].upper && x - vars[j].upper <= options.max_row_violation) x = vars[j].upper;
    }
  }

  const bool mip_incumbent = integer && result.status == SolveStatus::limit && solution.value_valid;
  if (integer && result.status == SolveStatus::limit) result.objective_bound = highs.getInfo().mip_dual_bound;
  if (!result.optimal() && !mip_incumbent) result.primal.clear();
  if (result.optimal() || mip_incumbent) {
    auto res = residuals(program, result.primal);
    result.max_row_violation = res.row;
    result.max_bound_violation = res.bound;
    if (res.row > options.max_row_violation || res.bound > options.max_bound_violation) {
      std::ostringstream msg;
      msg << "residual check failed: row violation " << res.row << ", bound violation " << res.bound;
      throw SolverError(msg.str());
    }
    result.objective = program.evaluate_objective(result.primal);
    if (integer && result.optimal()) result.objective_bound = result.objective;

    if (!integer && solution.dual_valid) {
      // HiGHS already reports d(objective)/d(rhs) under either sense.
      result.duals = solution.row_dual;
      result.reduced_costs = solution.col_dual;

      const bool minimize = program.sense() == ObjectiveSense::minimize;
      double dual_obj = program.objective_constant();
      const auto& rows = program.constraints();
      for (std::size_t i = 0; i < rows.size(); ++i) dual_obj += rows[i].rhs * result.duals[i];
      for (std::size_t j = 0; j < vars.size(); ++j) {
        const double z = result.reduced_costs[j];
        if (z == 0.0) continue;
        const bool at_lower = minimize ? z > 0.0 : z < 0.0;
        double bound = at_lower ? vars[j].lower : vars[j].upper;
        if (!std::isfinite(bound)) bound = result.primal[j];
        dual_obj += z * bound;
      }
      result.dual_objective = dual_obj;
    }
  }

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

DualProgram dualize(const LinearProgram& primal) {
  if (primal.sense() != ObjectiveSense::minimize) throw ModelError("dualize expects a minimization program");
  if (primal.has_integers()) throw ModelError("dualize expects a continuous program");

  DualProgram out;
  auto& dual = out.program;
  dual.set_sense(ObjectiveSense::maximize);
  dual.add_objective_constant(primal.objective_constant());

  const auto& rows = primal.constraints();
  const auto& cols = primal.variables();
  out.row_dual.reserve(rows.size());
  for (const auto& row : rows) {
    double lower = -kInfinity, upper = kInfinity;
    if (row.sense == RowSense::less_equal) upper = 0.0;
    if (row.sense == RowSense::greater_equal) lower = 0.0;
    auto y = dual.add_variable("dual[" + row.name + "]", lower, upper);
    dual.add_objective(y, row.rhs);
    out.row_dual.push_back(y);
  }

  // Column-wise view of A.
  std::vector<std::vector<Term>> columns(cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& t : rows[i].terms) columns[t.var.index].push_back({out.row_dual[i], t.coeff});

  out.upper_dual.assign(cols.size(), std::nullopt);
  out.lower_dual.assign(cols.size(), std::nullopt);
  out.column_row.reserve(cols.size());
  const auto& cost = primal.objective();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& v = cols[j];
    auto terms = std::move(columns[j]);
    if (std::isfinite(v.upper)) {
      auto zu = dual.add_variable("ub_dual[" + v.name + "]", 0.0, kInfinity);
      dual.add_objective(zu, -v.upper);
      terms.push_back({zu, -1.0});
      out.upper_dual[j] = zu;
    }
    RowSense sense = RowSense::equal;
    if (v.lower == 0.0) {
      sense = RowSense::less_equal;
    } else if (std::isfinite(v.lower)) {
      auto zl = dual.add_variable("lb_dual[" + v.name + "]", 0.0, kInfinity);
      dual.add_objective(zl, v.lower);
      terms.push_back({zl, 1.0});
      out.lower_dual[j] = zl;
    }
    out.column_row.push_back(dual.add_constraint("col[" + v.name + "]", std::move(terms), sense, cost[j]));
  }
  return out;
}

std::string to_lp_format(const LinearProgram& program) {
  std::ostringstream os;
  auto name = [&](VarId v) { return program.variable(v).name; };
  auto write_terms = [&](const std::vector<Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
      if (t.coeff == 0.0) continue;
      os << (t.coeff < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
      if (std::abs(t.coeff) != 1.0) os << format_number(std::abs(t.coeff)) << ' ';
      os << name(t.var);
      first = false;
    }
    if (first) os << "0";
  };

  os << (program.sense() == ObjectiveSense::minimize ? "Minimize\n" : "Maximize\n") << " obj: ";
  std::vector<Term> obj;
  for (std::size_t j = 0; j < program.num_variables(); ++j)
    if (program.objective()[j] != 0.0) obj.push_back({VarId{j}, program.objective()[j]});
  write_terms(obj);
  if (program.objective_constant() != 0.0) os << " + " << format_number(program.objective_constant()) << " constant";
  os << "\nSubject To\n";
  for (const auto& row : program.constraints()) {
    os << ' ' << row.name << ": ";
    write_terms(row.terms);
    os << (row.sense == RowSense::less_equal ? " <= " : row.sense == RowSense::equal ? " = " : " >= ")
       << format_number(row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : program.variables()) {
    os << ' ' << (std::isinf(v.lower) ? "-inf" : format_number(v.lower)) << " <= " << v.name << " <= "
       << (std::isinf(v.upper) ? "+inf" : format_number(v.upper)) << '\n';
  }
  bool any_binary = false;
  for (const auto& v : program.variables())
    if (v.type == VarType::binary) {
      if (!any_binary) os << "Binary\n";
      any_binary = true;
      os << ' ' << v.name << '\n';
    }
  os << "End\n";
  return os.str();
}

std::string backend_version() {
  return "HiGHS " + std::to_string(HIGHS_VERSION_MAJOR) + "." + std::to_string(HIGHS_VERSION_MINOR) + "." +
         std::to_string(HIGHS_VERSION_PATCH);
}

}  // namespace hydro::lp
