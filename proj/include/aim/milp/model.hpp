#ifndef AIM_MILP_MODEL_HPP
#define AIM_MILP_MODEL_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace aim::milp {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };

struct VarId {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();

  constexpr bool valid() const { return index != std::numeric_limits<std::uint32_t>::max(); }
  friend constexpr bool operator==(VarId a, VarId b) { return a.index == b.index; }
  friend constexpr bool operator!=(VarId a, VarId b) { return a.index != b.index; }
  friend constexpr bool operator<(VarId a, VarId b) { return a.index < b.index; }
};

struct Variable {
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInfinity;
};

/// Linear expression: sum of coefficient*variable terms plus a constant.
/// Terms are kept sorted by variable id with no duplicates.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}

  LinExpr& add(VarId v, double coeff);
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Drops terms with zero coefficient (does not change evaluation).
  void compact();

  double evaluate(const std::vector<double>& values) const;

 private:
  std::vector<std::pair<VarId, double>> terms_;
  double constant_ = 0.0;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Constraint {
  LinExpr expr;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct ConstraintId {
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
};

/// Minimize-only MILP: continuous and binary variables, linear constraints.
class MilpModel {
 public:
  VarId add_variable(VarKind kind, double lower, double upper);
  VarId add_continuous(double lower, double upper) {
    return add_variable(VarKind::Continuous, lower, upper);
  }
  VarId add_binary() { return add_variable(VarKind::Binary, 0.0, 1.0); }

  ConstraintId add_constraint(LinExpr expr, Sense sense, double rhs);

  /// Objective is always minimized.
  void set_objective(LinExpr expr);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const LinExpr& objective() const { return objective_; }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t num_binaries() const { return num_binaries_; }

  const Variable& variable(VarId v) const { return variables_.at(v.index); }

  /// Throws if the expression references an unregistered variable.
  void check_expr(const LinExpr& expr) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  LinExpr objective_;
  std::size_t num_binaries_ = 0;
};

}  // namespace aim::milp

#endif  // AIM_MILP_MODEL_HPP
