#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "cyflow/field.hpp"

namespace cyflow {

/// Formula over the real coordinates x1 .. x{2n}.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'pi' | 'x'k | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | log | sqrt
///
/// Parse errors throw ConfigError with the offending position.
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text, int real_dim);

  [[nodiscard]] double operator()(std::span<const double> x) const;
  [[nodiscard]] ScalarField sample(const GridPtr& grid) const;
  [[nodiscard]] const std::string& text() const noexcept { return text_; }
  [[nodiscard]] int real_dim() const noexcept { return real_dim_; }

 private:
  Expression(std::string text, int real_dim, std::shared_ptr<const Node> root)
      : text_(std::move(text)), real_dim_(real_dim), root_(std::move(root)) {}

  std::string text_;
  int real_dim_;
  std::shared_ptr<const Node> root_;
};

}  // namespace cyflow
