#include "cyflow/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cyflow/error.hpp"

namespace cyflow {

struct Expression::Node {
  enum class Kind { Constant, Coordinate, Negate, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Log, Sqrt };

  Kind kind = Kind::Constant;
  double value = 0.0;
  int axis = 0;
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Coordinate: return x[static_cast<std::size_t>(axis)];
      case Kind::Negate: return -lhs->eval(x);
      case Kind::Add: return lhs->eval(x) + rhs->eval(x);
      case Kind::Sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::Mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::Div: return lhs->eval(x) / rhs->eval(x);
      case Kind::Pow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Kind::Call: break;
    }
    const double a = lhs->eval(x);
    switch (func) {
      case Func::Sin: return std::sin(a);
      case Func::Cos: return std::cos(a);
      case Func::Exp: return std::exp(a);
      case Func::Log: return std::log(a);
      case Func::Sqrt: return std::sqrt(a);
    }
    return a;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  Parser(std::string_view text, int real_dim) : s_(text), dim_(real_dim) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected character");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "formula \"" << s_ << "\": " << what << " at position " << pos_;
    throw Error(ErrorKind::ConfigError, msg.str());
  }

  void skip_space() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Kind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr left = term();
    while (true) {
      if (accept('+')) {
        left = binary(Node::Kind::Add, left, term());
      } else if (accept('-')) {
        left = binary(Node::Kind::Sub, left, term());
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    while (true) {
      if (accept('*')) {
        left = binary(Node::Kind::Mul, left, unary());
      } else if (accept('/')) {
        left = binary(Node::Kind::Div, left, unary());
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Negate;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Node::Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of formula");
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character");
  }

  NodePtr number() {
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    const std::string_view name = s_.substr(start, pos_ - start);
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->value = std::numbers::pi;
      return n;
    }
    if (name.size() > 1 && name[0] == 'x') {
      int k = 0;
      const auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        if (k < 1 || k > dim_) {
          pos_ = start;
          fail("coordinate " + std::string(name) + " outside x1..x" +
               std::to_string(dim_));
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Coordinate;
        n->axis = k - 1;
        return n;
      }
    }
    Node::Func func{};
    if (name == "sin") {
      func = Node::Func::Sin;
    } else if (name == "cos") {
      func = Node::Func::Cos;
    } else if (name == "exp") {
      func = Node::Func::Exp;
    } else if (name == "log") {
      func = Node::Func::Log;
    } else if (name == "sqrt") {
      func = Node::Func::Sqrt;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!accept('(')) fail("expected '(' after function name");
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->func = func;
    n->lhs = expr();
    if (!accept(')')) fail("expected ')'");
    return n;
  }

  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, int real_dim) {
  Parser parser(text, real_dim);
  NodePtr root = parser.parse();
  return Expression(std::string(text), real_dim, std::move(root));
}

double Expression::operator()(std::span<const double> x) const {
  if (x.size() < static_cast<std::size_t>(real_dim_)) {
    throw Error(ErrorKind::InvalidArgument, "too few coordinates");
  }
  return root_->eval(x);
}

ScalarField Expression::sample(const GridPtr& grid) const {
  if (grid->real_dim() != real_dim_) {
    throw Error(ErrorKind::GridMismatch,
                "formula dimension does not match the grid");
  }
  return ScalarField::from_function(
      grid, [this](std::span<const double> x) { return root_->eval(x); });
}

}  // namespace cyflow
