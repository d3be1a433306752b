#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kummer {

// Node kinds of a small arithmetic expression tree over occupation arguments.
// Hbar evaluates to the Planck constant in quantum evaluation and to zero in
// classical evaluation. Phi is the family phi_k(u) = sum_j u^j/(j+k)!, so that
// phi_0 = exp and phi_1(u) = (e^u - 1)/u ("exprel").
enum class Op { Const, Arg, Hbar, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sqrt, Phi };

class Expr {
public:
    Expr();                    // the constant 0
    Expr(double value);        // implicit constant, so that 2.0 * x reads naturally

    static Expr constant(double value);
    static Expr arg(int index);
    static Expr hbar();

    Op op() const;
    double value() const;      // Const only
    int index() const;         // Arg: argument index; Pow: exponent; Phi: order k
    const std::vector<Expr>& children() const;

    double eval(std::span<const double> x, double hbar) const;
    double eval(const std::vector<double>& x, double hbar) const {
        return eval(std::span<const double>(x.data(), x.size()), hbar);
    }

    // Partial derivative with respect to argument i (hbar is held fixed).
    Expr diff(int i) const;
    // Replace every arg(i) by replacements[i].
    Expr substitute(const std::vector<Expr>& replacements) const;

    bool is_constant() const;  // no arguments and no hbar node
    bool uses_hbar() const;
    int max_arg() const;       // -1 when no argument appears

    nlohmann::json to_json() const;
    static Expr from_json(const nlohmann::json& doc);
    std::string to_string() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& a, int n);
    friend Expr exp(const Expr& a);
    friend Expr log(const Expr& a);
    friend Expr sqrt(const Expr& a);
    friend Expr phi(int k, const Expr& a);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    static Expr make(Op op, std::vector<Expr> kids, double value = 0.0, int index = 0);
    std::shared_ptr<const Node> node_;
};

inline Expr exprel(const Expr& a) { return phi(1, a); }

// phi_k(u) = sum_{j>=0} u^j/(j+k)!, evaluated without cancellation near u = 0.
double phi_function(int k, double u);

} // namespace kummer
