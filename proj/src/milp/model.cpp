#include "aim/milp/model.hpp"

#include <algorithm>
#include <cmath>

namespace aim::milp {

LinExpr& LinExpr::add(VarId v, double coeff) {
  if (!v.valid()) throw std::invalid_argument("LinExpr::add: invalid VarId");
  if (std::isnan(coeff)) throw std::invalid_argument("LinExpr::add: NaN coefficient");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), v,
                             [](const auto& t, VarId id) { return t.first < id; });
  if (it != terms_.end() && it->first == v) {
    it->second += coeff;
  } else {
    terms_.insert(it, {v, coeff});
  }
  return *this;
}

void LinExpr::compact() {
  terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                              [](const auto& t) { return t.second == 0.0; }),
               terms_.end());
}

double LinExpr::evaluate(const std::vector<double>& values) const {
  double sum = constant_;
  for (const auto& [v, c] : terms_) sum += c * values.at(v.index);
  return sum;
}

VarId MilpModel::add_variable(VarKind kind, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper))
    throw std::invalid_argument("add_variable: NaN bound");
  if (lower > upper) throw std::invalid_argument("add_variable: lower > upper");
  if (kind == VarKind::Binary && (lower != 0.0 || upper != 1.0))
    throw std::invalid_argument("add_variable: binary variables must have bounds [0, 1]");
  variables_.push_back({kind, lower, upper});
  if (kind == VarKind::Binary) ++num_binaries_;
  return VarId{static_cast<std::uint32_t>(variables_.size() - 1)};
}

ConstraintId MilpModel::add_constraint(LinExpr expr, Sense sense, double rhs) {
  if (std::isnan(rhs)) throw std::invalid_argument("add_constraint: NaN rhs");
  check_expr(expr);
  expr.compact();
  constraints_.push_back({std::move(expr), sense, rhs});
  return ConstraintId{static_cast<std::uint32_t>(constraints_.size() - 1)};
}

void MilpModel::set_objective(LinExpr expr) {
  check_expr(expr);
  expr.compact();
  objective_ = std::move(expr);
}

void MilpModel::check_expr(const LinExpr& expr) const {
  for (const auto& [v, c] : expr.terms()) {
    if (v.index >= variables_.size())
      throw std::invalid_argument("expression references unregistered variable x" +
                                  std::to_string(v.index));
    if (std::isnan(c) || std::isinf(c))
      throw std::invalid_argument("expression has non-finite coefficient");
  }
}

}  // namespace aim::milp
