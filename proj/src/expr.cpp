#include "pseudolab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>

namespace pseudolab {

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)),
      position_(position) {}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t pos;
  double number = 0.0;
  std::string text = {};
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (i_ >= src_.size()) {
        out.push_back({Tok::End, i_});
        return out;
      }
      const std::size_t start = i_;
      const char c = src_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        out.push_back(number(start));
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) ++i_;
        out.push_back({Tok::Ident, start, 0.0, std::string(src_.substr(start, i_ - start))});
        continue;
      }
      // U+2212 MINUS SIGN, as typed in most mathematical text.
      if (src_.substr(i_, 3) == "\xE2\x88\x92") {
        i_ += 3;
        out.push_back({Tok::Minus, start});
        continue;
      }
      ++i_;
      switch (c) {
        case '+': out.push_back({Tok::Plus, start}); break;
        case '-': out.push_back({Tok::Minus, start}); break;
        case '*': out.push_back({Tok::Star, start}); break;
        case '/': out.push_back({Tok::Slash, start}); break;
        case '^': out.push_back({Tok::Caret, start}); break;
        case '(': out.push_back({Tok::LParen, start}); break;
        case ')': out.push_back({Tok::RParen, start}); break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", start);
      }
    }
  }

private:
  void skip_space() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
  }

  Token number(std::size_t start) {
    bool digits = false;
    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) { ++i_; digits = true; }
    if (i_ < src_.size() && src_[i_] == '.') {
      ++i_;
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) { ++i_; digits = true; }
    }
    if (!digits) throw ParseError("malformed number", start);
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
        i_ = j;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
      } else {
        throw ParseError("malformed exponent", i_);
      }
    }
    const std::string text(src_.substr(start, i_ - start));
    return {Tok::Number, start, std::strtod(text.c_str(), nullptr), text};
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

constexpr int kAddBp = 10;
constexpr int kMulBp = 20;
constexpr int kUnaryBp = 30;
constexpr int kPowBp = 40;

std::optional<Function> lookup_function(const std::string& name) {
  if (name == "exp") return Function::Exp;
  if (name == "sin") return Function::Sin;
  if (name == "cos") return Function::Cos;
  if (name == "sqrt") return Function::Sqrt;
  if (name == "abs") return Function::Abs;
  if (name == "re") return Function::Re;
  if (name == "im") return Function::Im;
  return std::nullopt;
}

const char* function_name(Function f) {
  switch (f) {
    case Function::Exp: return "exp";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
    case Function::Re: return "re";
    case Function::Im: return "im";
  }
  return "?";
}

// Pratt parser over the token stream.
class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr parse_all() {
    ExprPtr e = parse(0);
    if (peek().kind != Tok::End) throw ParseError("unexpected trailing input", peek().pos);
    return e;
  }

private:
  const Token& peek() const { return toks_[k_]; }
  const Token& next() { return toks_[k_++]; }

  static int left_bp(Tok t) {
    switch (t) {
      case Tok::Plus:
      case Tok::Minus: return kAddBp;
      case Tok::Star:
      case Tok::Slash: return kMulBp;
      case Tok::Caret: return kPowBp;
      default: return 0;
    }
  }

  ExprPtr parse(int rbp) {
    ExprPtr left = nud(next());
    while (left_bp(peek().kind) > rbp) left = led(next(), std::move(left));
    return left;
  }

  ExprPtr nud(const Token& t) {
    switch (t.kind) {
      case Tok::Number: return Expr::constant(t.number);
      case Tok::Minus: return Expr::negate(parse(kUnaryBp));
      case Tok::LParen: {
        ExprPtr inner = parse(0);
        expect(Tok::RParen, "expected ')'");
        return inner;
      }
      case Tok::Ident: {
        if (t.text == "x") return Expr::variable();
        if (t.text == "i") return Expr::imag_unit();
        if (t.text == "pi") return Expr::constant(3.14159265358979323846);
        const auto f = lookup_function(t.text);
        if (!f) throw ParseError("unknown identifier '" + t.text + "'", t.pos);
        expect(Tok::LParen, "expected '(' after function name");
        ExprPtr arg = parse(0);
        expect(Tok::RParen, "expected ')'");
        return Expr::call(*f, std::move(arg));
      }
      case Tok::End: throw ParseError("unexpected end of input", t.pos);
      default: throw ParseError("unexpected token", t.pos);
    }
  }

  ExprPtr led(const Token& t, ExprPtr left) {
    switch (t.kind) {
      case Tok::Plus: return Expr::binary(NodeKind::Add, std::move(left), parse(kAddBp));
      case Tok::Minus: return Expr::binary(NodeKind::Sub, std::move(left), parse(kAddBp));
      case Tok::Star: return Expr::binary(NodeKind::Mul, std::move(left), parse(kMulBp));
      case Tok::Slash: return Expr::binary(NodeKind::Div, std::move(left), parse(kMulBp));
      case Tok::Caret: return Expr::binary(NodeKind::Pow, std::move(left), parse(kPowBp - 1));
      default: throw ParseError("unexpected token", t.pos);
    }
  }

  void expect(Tok kind, const char* msg) {
    if (peek().kind != kind) throw ParseError(msg, peek().pos);
    ++k_;
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

Complex integer_power(Complex base, long n) {
  const bool invert = n < 0;
  unsigned long e = static_cast<unsigned long>(invert ? -n : n);
  Complex result(1.0, 0.0);
  while (e) {
    if (e & 1UL) result *= base;
    base *= base;
    e >>= 1;
  }
  if (invert) {
    if (result == Complex(0.0, 0.0)) throw EvalError("division by zero in negative power");
    return 1.0 / result;
  }
  return result;
}

Complex eval_node(const ExprNode& n, double x) {
  switch (n.kind) {
    case NodeKind::Constant: return {n.value, 0.0};
    case NodeKind::Variable: return {x, 0.0};
    case NodeKind::ImagUnit: return {0.0, 1.0};
    case NodeKind::Negate: return -eval_node(*n.children[0], x);
    case NodeKind::Add: return eval_node(*n.children[0], x) + eval_node(*n.children[1], x);
    case NodeKind::Sub: return eval_node(*n.children[0], x) - eval_node(*n.children[1], x);
    case NodeKind::Mul: return eval_node(*n.children[0], x) * eval_node(*n.children[1], x);
    case NodeKind::Div: {
      const Complex den = eval_node(*n.children[1], x);
      if (den == Complex(0.0, 0.0)) throw EvalError("division by zero at x = " + std::to_string(x));
      return eval_node(*n.children[0], x) / den;
    }
    case NodeKind::Pow: {
      const Complex base = eval_node(*n.children[0], x);
      const Complex ex = eval_node(*n.children[1], x);
      if (ex.imag() == 0.0 && std::abs(ex.real()) <= 64.0 && ex.real() == std::floor(ex.real()))
        return integer_power(base, static_cast<long>(ex.real()));
      if (base == Complex(0.0, 0.0)) {
        if (ex.real() > 0.0) return {0.0, 0.0};
        throw EvalError("zero raised to a non-positive power");
      }
      return std::pow(base, ex);
    }
    case NodeKind::Call: {
      const Complex a = eval_node(*n.children[0], x);
      switch (n.function) {
        case Function::Exp: return std::exp(a);
        case Function::Sin: return std::sin(a);
        case Function::Cos: return std::cos(a);
        case Function::Sqrt: return std::sqrt(a);
        case Function::Abs: return {std::abs(a), 0.0};
        case Function::Re: return {a.real(), 0.0};
        case Function::Im: return {a.imag(), 0.0};
      }
    }
  }
  throw EvalError("malformed expression node");
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case NodeKind::Variable: out += 'x'; return;
    case NodeKind::ImagUnit: out += 'i'; return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::Call:
      out += function_name(n.function);
      out += '(';
      print_node(*n.children[0], out);
      out += ')';
      return;
    default: break;
  }
  const char* op = n.kind == NodeKind::Add   ? " + "
                   : n.kind == NodeKind::Sub ? " - "
                   : n.kind == NodeKind::Mul ? " * "
                   : n.kind == NodeKind::Div ? " / "
                                             : " ^ ";
  out += '(';
  print_node(*n.children[0], out);
  out += op;
  print_node(*n.children[1], out);
  out += ')';
}

}  // namespace

Complex Expr::evaluate(double x) const {
  const Complex v = eval_node(*root_, x);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw EvalError("non-finite value at x = " + std::to_string(x));
  return v;
}

std::string Expr::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

ExprPtr Expr::constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Constant;
  n->value = v;
  return n;
}

ExprPtr Expr::variable() {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  return n;
}

ExprPtr Expr::imag_unit() {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::ImagUnit;
  return n;
}

ExprPtr Expr::negate(ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Negate;
  n->children = {std::move(a)};
  return n;
}

ExprPtr Expr::binary(NodeKind kind, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->children = {std::move(a), std::move(b)};
  return n;
}

ExprPtr Expr::call(Function f, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->function = f;
  n->children = {std::move(a)};
  return n;
}

Expr parse_expression(std::string_view src) {
  Lexer lexer(src);
  Parser parser(lexer.run());
  return Expr(parser.parse_all());
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  if (a.kind == NodeKind::Constant && a.value != b.value) return false;
  if (a.kind == NodeKind::Call && a.function != b.function) return false;
  for (std::size_t k = 0; k < a.children.size(); ++k)
    if (!structurally_equal(*a.children[k], *b.children[k])) return false;
  return true;
}

}  // namespace pseudolab
