#include "aim/milp/lp_format.hpp"

#include <cmath>

#include "aim/util/text.hpp"

namespace aim::milp {

namespace {

using util::format_double;

void append_term(std::string& out, double coeff, std::uint32_t var, bool first) {
  if (first) {
    if (coeff < 0.0) out += "- ";
  } else {
    out += coeff < 0.0 ? " - " : " + ";
  }
  double mag = std::abs(coeff);
  if (mag != 1.0) {
    out += format_double(mag);
    out += ' ';
  }
  out += 'x';
  out += std::to_string(var);
}

void append_expr(std::string& out, const LinExpr& expr, bool with_constant) {
  bool first = true;
  for (const auto& [v, c] : expr.terms()) {
    if (c == 0.0) continue;
    append_term(out, c, v.index, first);
    first = false;
  }
  if (with_constant && expr.constant() != 0.0) {
    double c = expr.constant();
    if (first) {
      out += format_double(c);
      first = false;
    } else {
      out += c < 0.0 ? " - " : " + ";
      out += format_double(std::abs(c));
    }
  }
  if (first) out += '0';
}

}  // namespace

std::string export_lp_text(const MilpModel& model) {
  std::string out;
  out.reserve(256 + 64 * model.num_constraints());

  out += "Minimize\n obj: ";
  append_expr(out, model.objective(), /*with_constant=*/true);
  out += '\n';

  if (model.num_constraints() > 0) {
    out += "Subject To\n";
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
      const Constraint& c = model.constraints()[i];
      out += " c";
      out += std::to_string(i);
      out += ": ";
      append_expr(out, c.expr, /*with_constant=*/false);
      switch (c.sense) {
        case Sense::LessEqual: out += " <= "; break;
        case Sense::GreaterEqual: out += " >= "; break;
        case Sense::Equal: out += " = "; break;
      }
      out += format_double(c.rhs - c.expr.constant());
      out += '\n';
    }
  }

  out += "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variables()[j];
    if (v.kind == VarKind::Binary) continue;  // listed in the Binary section
    out += ' ';
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      out += 'x';
      out += std::to_string(j);
      out += " free\n";
      continue;
    }
    if (std::isfinite(v.lower)) {
      out += format_double(v.lower);
      out += " <= ";
    } else {
      out += "-inf <= ";
    }
    out += 'x';
    out += std::to_string(j);
    if (std::isfinite(v.upper)) {
      out += " <= ";
      out += format_double(v.upper);
    }
    out += '\n';
  }

  if (model.num_binaries() > 0) {
    out += "Binary\n";
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
      if (model.variables()[j].kind != VarKind::Binary) continue;
      out += " x";
      out += std::to_string(j);
      out += '\n';
    }
  }

  out += "End\n";
  return out;
}

}  // namespace aim::milp
