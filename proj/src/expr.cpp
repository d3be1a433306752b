#include "kummer/expr.hpp"

#include <cmath>
#include <sstream>

#include "kummer/errors.hpp"

namespace kummer {

struct Expr::Node {
    Op op;
    double value;
    int index;
    std::vector<Expr> kids;
};

namespace {

bool is_const(const Expr& e, double v) { return e.op() == Op::Const && e.value() == v; }

const char* op_name(Op op) {
    switch (op) {
    case Op::Const: return "const";
    case Op::Arg: return "arg";
    case Op::Hbar: return "hbar";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Pow: return "pow";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Phi: return "phi";
    }
    return "?";
}

} // namespace

double phi_function(int k, double u) {
    if (k < 0) throw ValidationError("expr.phi", "phi order must be nonnegative");
    if (k == 0) return std::exp(u);
    if (std::fabs(u) < 2.0) {
        double term = 1.0;
        for (int j = 2; j <= k; ++j) term /= j;
        double sum = term;
        for (int j = 1; j < 200; ++j) {
            term *= u / (j + k);
            sum += term;
            if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
        }
        return sum;
    }
    double value = std::expm1(u) / u;
    double inv_fact = 1.0;
    for (int j = 2; j <= k; ++j) {
        inv_fact /= (j - 1);
        value = (value - inv_fact) / u;
    }
    return value;
}

Expr::Expr() : Expr(constant(0.0)) {}
Expr::Expr(double value) : Expr(constant(value)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::make(Op op, std::vector<Expr> kids, double value, int index) {
    return Expr(std::make_shared<const Node>(Node{op, value, index, std::move(kids)}));
}

Expr Expr::constant(double value) { return make(Op::Const, {}, value); }

Expr Expr::arg(int index) {
    if (index < 0) throw ValidationError("expr.arg", "argument index must be nonnegative");
    return make(Op::Arg, {}, 0.0, index);
}

Expr Expr::hbar() { return make(Op::Hbar, {}); }

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
const std::vector<Expr>& Expr::children() const { return node_->kids; }

Expr operator+(const Expr& a, const Expr& b) {
    if (a.op() == Op::Const && b.op() == Op::Const) return Expr::constant(a.value() + b.value());
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return Expr::make(Op::Add, {a, b});
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.op() == Op::Const && b.op() == Op::Const) return Expr::constant(a.value() - b.value());
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return -b;
    return Expr::make(Op::Sub, {a, b});
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.op() == Op::Const && b.op() == Op::Const) return Expr::constant(a.value() * b.value());
    if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return Expr::make(Op::Mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.op() == Op::Const && b.op() == Op::Const) return Expr::constant(a.value() / b.value());
    if (is_const(a, 0.0)) return Expr::constant(0.0);
    if (is_const(b, 1.0)) return a;
    return Expr::make(Op::Div, {a, b});
}

Expr operator-(const Expr& a) {
    if (a.op() == Op::Const) return Expr::constant(-a.value());
    if (a.op() == Op::Neg) return a.children()[0];
    return Expr::make(Op::Neg, {a});
}

Expr pow(const Expr& a, int n) {
    if (n == 0) return Expr::constant(1.0);
    if (n == 1) return a;
    if (a.op() == Op::Const) return Expr::constant(std::pow(a.value(), n));
    return Expr::make(Op::Pow, {a}, 0.0, n);
}

Expr exp(const Expr& a) {
    if (a.op() == Op::Const) return Expr::constant(std::exp(a.value()));
    return Expr::make(Op::Exp, {a});
}

Expr log(const Expr& a) {
    if (a.op() == Op::Const) return Expr::constant(std::log(a.value()));
    return Expr::make(Op::Log, {a});
}

Expr sqrt(const Expr& a) {
    if (a.op() == Op::Const) return Expr::constant(std::sqrt(a.value()));
    return Expr::make(Op::Sqrt, {a});
}

Expr phi(int k, const Expr& a) {
    if (k < 0) throw ValidationError("expr.phi", "phi order must be nonnegative");
    if (k == 0) return exp(a);
    if (a.op() == Op::Const) return Expr::constant(phi_function(k, a.value()));
    return Expr::make(Op::Phi, {a}, 0.0, k);
}

double Expr::eval(std::span<const double> x, double hbar) const {
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Arg:
        if (static_cast<std::size_t>(n.index) >= x.size())
            throw ValidationError("expr.arg", "expression refers to a missing argument");
        return x[n.index];
    case Op::Hbar: return hbar;
    case Op::Add: return n.kids[0].eval(x, hbar) + n.kids[1].eval(x, hbar);
    case Op::Sub: return n.kids[0].eval(x, hbar) - n.kids[1].eval(x, hbar);
    case Op::Mul: return n.kids[0].eval(x, hbar) * n.kids[1].eval(x, hbar);
    case Op::Div: return n.kids[0].eval(x, hbar) / n.kids[1].eval(x, hbar);
    case Op::Neg: return -n.kids[0].eval(x, hbar);
    case Op::Pow: return std::pow(n.kids[0].eval(x, hbar), n.index);
    case Op::Exp: return std::exp(n.kids[0].eval(x, hbar));
    case Op::Log: return std::log(n.kids[0].eval(x, hbar));
    case Op::Sqrt: return std::sqrt(n.kids[0].eval(x, hbar));
    case Op::Phi: return phi_function(n.index, n.kids[0].eval(x, hbar));
    }
    return 0.0;
}

Expr Expr::diff(int i) const {
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const:
    case Op::Hbar: return constant(0.0);
    case Op::Arg: return constant(n.index == i ? 1.0 : 0.0);
    case Op::Add: return n.kids[0].diff(i) + n.kids[1].diff(i);
    case Op::Sub: return n.kids[0].diff(i) - n.kids[1].diff(i);
    case Op::Mul: {
        const Expr& a = n.kids[0];
        const Expr& b = n.kids[1];
        return a.diff(i) * b + a * b.diff(i);
    }
    case Op::Div: {
        const Expr& a = n.kids[0];
        const Expr& b = n.kids[1];
        return (a.diff(i) * b - a * b.diff(i)) / pow(b, 2);
    }
    case Op::Neg: return -n.kids[0].diff(i);
    case Op::Pow: {
        const Expr& a = n.kids[0];
        return Expr::constant(n.index) * pow(a, n.index - 1) * a.diff(i);
    }
    case Op::Exp: return *this * n.kids[0].diff(i);
    case Op::Log: return n.kids[0].diff(i) / n.kids[0];
    case Op::Sqrt: return n.kids[0].diff(i) / (Expr::constant(2.0) * *this);
    case Op::Phi: {
        // phi_k' = phi_k - k phi_{k+1}
        const Expr& a = n.kids[0];
        return (*this - Expr::constant(n.index) * phi(n.index + 1, a)) * a.diff(i);
    }
    }
    return constant(0.0);
}

Expr Expr::substitute(const std::vector<Expr>& replacements) const {
    const Node& n = *node_;
    switch (n.op) {
    case Op::Const:
    case Op::Hbar: return *this;
    case Op::Arg:
        if (static_cast<std::size_t>(n.index) >= replacements.size())
            throw ValidationError("expr.arg", "substitution is missing an argument");
        return replacements[n.index];
    case Op::Add: return n.kids[0].substitute(replacements) + n.kids[1].substitute(replacements);
    case Op::Sub: return n.kids[0].substitute(replacements) - n.kids[1].substitute(replacements);
    case Op::Mul: return n.kids[0].substitute(replacements) * n.kids[1].substitute(replacements);
    case Op::Div: return n.kids[0].substitute(replacements) / n.kids[1].substitute(replacements);
    case Op::Neg: return -n.kids[0].substitute(replacements);
    case Op::Pow: return pow(n.kids[0].substitute(replacements), n.index);
    case Op::Exp: return exp(n.kids[0].substitute(replacements));
    case Op::Log: return log(n.kids[0].substitute(replacements));
    case Op::Sqrt: return sqrt(n.kids[0].substitute(replacements));
    case Op::Phi: return phi(n.index, n.kids[0].substitute(replacements));
    }
    return *this;
}

bool Expr::is_constant() const { return max_arg() < 0 && !uses_hbar(); }

bool Expr::uses_hbar() const {
    if (node_->op == Op::Hbar) return true;
    for (const auto& k : node_->kids)
        if (k.uses_hbar()) return true;
    return false;
}

int Expr::max_arg() const {
    int m = node_->op == Op::Arg ? node_->index : -1;
    for (const auto& k : node_->kids) m = std::max(m, k.max_arg());
    return m;
}

nlohmann::json Expr::to_json() const {
    const Node& n = *node_;
    if (n.op == Op::Const) return n.value;
    if (n.op == Op::Arg) return nlohmann::json{{"arg", n.index}};
    nlohmann::json doc{{"op", op_name(n.op)}};
    if (n.op == Op::Hbar) return doc;
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& k : n.kids) kids.push_back(k.to_json());
    doc["args"] = kids;
    if (n.op == Op::Pow) doc["n"] = n.index;
    if (n.op == Op::Phi) doc["k"] = n.index;
    return doc;
}

Expr Expr::from_json(const nlohmann::json& doc) {
    if (doc.is_number()) return constant(doc.get<double>());
    if (!doc.is_object()) throw ValidationError("expr.json", "expression must be a number or an object");
    if (doc.contains("arg")) {
        if (!doc["arg"].is_number_integer()) throw ValidationError("expr.json", "arg index must be an integer");
        return arg(doc["arg"].get<int>());
    }
    if (!doc.contains("op") || !doc["op"].is_string())
        throw ValidationError("expr.json", "expression object needs \"op\" or \"arg\"");
    const std::string name = doc["op"].get<std::string>();
    if (name == "hbar") return hbar();
    std::vector<Expr> kids;
    if (doc.contains("args")) {
        if (!doc["args"].is_array()) throw ValidationError("expr.json", "\"args\" must be an array");
        for (const auto& k : doc["args"]) kids.push_back(from_json(k));
    }
    auto need = [&](std::size_t count) {
        if (kids.size() != count)
            throw ValidationError("expr.json", "operator \"" + name + "\" has the wrong number of arguments");
    };
    auto integer_field = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_number_integer())
            throw ValidationError("expr.json", "operator \"" + name + "\" needs integer field \"" + key + "\"");
        return doc[key].get<int>();
    };
    if (name == "add" || name == "mul") {
        if (kids.empty()) throw ValidationError("expr.json", "operator \"" + name + "\" needs arguments");
        Expr acc = kids[0];
        for (std::size_t j = 1; j < kids.size(); ++j) acc = name == "add" ? acc + kids[j] : acc * kids[j];
        return acc;
    }
    if (name == "sub") { need(2); return kids[0] - kids[1]; }
    if (name == "div") { need(2); return kids[0] / kids[1]; }
    if (name == "neg") { need(1); return -kids[0]; }
    if (name == "pow") { need(1); return pow(kids[0], integer_field("n")); }
    if (name == "exp") { need(1); return exp(kids[0]); }
    if (name == "log") { need(1); return log(kids[0]); }
    if (name == "sqrt") { need(1); return sqrt(kids[0]); }
    if (name == "exprel") { need(1); return exprel(kids[0]); }
    if (name == "phi") { need(1); return phi(integer_field("k"), kids[0]); }
    throw ValidationError("expr.json", "unknown operator \"" + name + "\"");
}

std::string Expr::to_string() const {
    const Node& n = *node_;
    std::ostringstream out;
    out.precision(17);
    switch (n.op) {
    case Op::Const: out << n.value; break;
    case Op::Arg: out << "x" << n.index; break;
    case Op::Hbar: out << "hbar"; break;
    case Op::Add: out << "(" << n.kids[0].to_string() << " + " << n.kids[1].to_string() << ")"; break;
    case Op::Sub: out << "(" << n.kids[0].to_string() << " - " << n.kids[1].to_string() << ")"; break;
    case Op::Mul: out << "(" << n.kids[0].to_string() << " * " << n.kids[1].to_string() << ")"; break;
    case Op::Div: out << "(" << n.kids[0].to_string() << " / " << n.kids[1].to_string() << ")"; break;
    case Op::Neg: out << "-" << n.kids[0].to_string(); break;
    case Op::Pow: out << n.kids[0].to_string() << "^" << n.index; break;
    case Op::Phi: out << "phi" << n.index << "(" << n.kids[0].to_string() << ")"; break;
    default: out << op_name(n.op) << "(" << n.kids[0].to_string() << ")"; break;
    }
    return out.str();
}

} // namespace kummer
