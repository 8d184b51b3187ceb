// Arithmetic in GF(2^r) and dense linear algebra over it.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ldnet::gf {

inline constexpr int kMaxDegree = 32;

using Rng = std::mt19937_64;

namespace detail {

inline int poly_degree(std::uint64_t p) { return p == 0 ? -1 : 63 - std::countl_zero(p); }

inline std::uint64_t poly_mod(std::uint64_t value, std::uint64_t modulus) {
    const int mod_deg = poly_degree(modulus);
    for (int deg = poly_degree(value); deg >= mod_deg; deg = poly_degree(value)) {
        value ^= modulus << (deg - mod_deg);
    }
    return value;
}

// Carry-less product of two polynomials whose degrees sum to at most 63.
inline std::uint64_t clmul(std::uint64_t lhs, std::uint64_t rhs) {
    std::uint64_t acc = 0;
    while (rhs != 0) {
        if (rhs & 1U) acc ^= lhs;
        lhs <<= 1;
        rhs >>= 1;
    }
    return acc;
}

inline std::uint64_t poly_mulmod(std::uint64_t lhs, std::uint64_t rhs, std::uint64_t modulus) {
    return poly_mod(clmul(lhs, rhs), modulus);
}

inline std::uint64_t poly_gcd(std::uint64_t lhs, std::uint64_t rhs) {
    while (rhs != 0) {
        lhs = poly_mod(lhs, rhs);
        std::swap(lhs, rhs);
    }
    return lhs;
}

// x^(2^k) mod modulus by repeated squaring.
inline std::uint64_t frobenius_power_of_x(int k, std::uint64_t modulus) {
    std::uint64_t acc = poly_mod(0b10, modulus);
    for (int i = 0; i < k; ++i) acc = poly_mulmod(acc, acc, modulus);
    return acc;
}

inline std::vector<int> prime_divisors(int value) {
    std::vector<int> primes;
    for (int p = 2; p * p <= value; ++p) {
        if (value % p == 0) {
            primes.push_back(p);
            while (value % p == 0) value /= p;
        }
    }
    if (value > 1) primes.push_back(value);
    return primes;
}

}  // namespace detail

// Rabin's test: f of degree n is irreducible iff x^(2^n) = x mod f and
// gcd(x^(2^(n/q)) - x, f) = 1 for every prime q dividing n.
inline bool is_irreducible(std::uint64_t poly) {
    const int degree = detail::poly_degree(poly);
    if (degree < 1) return false;
    if (detail::frobenius_power_of_x(degree, poly) != detail::poly_mod(0b10, poly)) return false;
    for (int q : detail::prime_divisors(degree)) {
        const std::uint64_t h = detail::frobenius_power_of_x(degree / q, poly) ^ detail::poly_mod(0b10, poly);
        if (detail::poly_degree(detail::poly_gcd(poly, h)) > 0) return false;
    }
    return true;
}

namespace detail {

inline std::uint64_t search_modulus(int degree) {
    const std::uint64_t top = std::uint64_t{1} << degree;
    // Constant term must be 1, otherwise x divides the polynomial (degree >= 2).
    for (std::uint64_t candidate = top | 1U; candidate < (top << 1); candidate += 2) {
        if (is_irreducible(candidate)) return candidate;
    }
    throw std::logic_error("no irreducible polynomial found");
}

inline const std::array<std::uint64_t, kMaxDegree + 1>& modulus_table() {
    static const auto table = [] {
        std::array<std::uint64_t, kMaxDegree + 1> out{};
        for (int degree = 1; degree <= kMaxDegree; ++degree) out[degree] = search_modulus(degree);
        return out;
    }();
    return table;
}

}  // namespace detail

// Smallest irreducible polynomial of the given degree, read as an integer with bit `degree` set.
inline std::uint64_t field_modulus(int degree) {
    if (degree < 1 || degree > kMaxDegree) {
        throw std::invalid_argument("field degree must lie in [1, 32], got " + std::to_string(degree));
    }
    return detail::modulus_table()[degree];
}

class FieldElem {
public:
    FieldElem() = default;
    FieldElem(std::uint32_t bits, int degree) : bits_(bits), degree_(static_cast<std::uint8_t>(degree)) {
        if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("field degree out of range");
        if (degree < 32 && (bits >> degree) != 0) throw std::invalid_argument("field element exceeds 2^r");
    }

    static FieldElem zero(int degree) { return {0, degree}; }
    static FieldElem one(int degree) { return {1, degree}; }

    [[nodiscard]] std::uint32_t bits() const { return bits_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] bool is_zero() const { return bits_ == 0; }

    friend bool operator==(const FieldElem&, const FieldElem&) = default;

private:
    std::uint32_t bits_ = 0;
    std::uint8_t degree_ = 1;
};

inline void require_same_degree(const FieldElem& lhs, const FieldElem& rhs) {
    if (lhs.degree() != rhs.degree()) throw std::invalid_argument("field degree mismatch");
}

inline FieldElem add(const FieldElem& lhs, const FieldElem& rhs) {
    require_same_degree(lhs, rhs);
    return {lhs.bits() ^ rhs.bits(), lhs.degree()};
}

inline FieldElem mul(const FieldElem& lhs, const FieldElem& rhs) {
    require_same_degree(lhs, rhs);
    const std::uint64_t product = detail::clmul(lhs.bits(), rhs.bits());
    return {static_cast<std::uint32_t>(detail::poly_mod(product, field_modulus(lhs.degree()))), lhs.degree()};
}

inline FieldElem pow(FieldElem base, std::uint64_t exponent) {
    FieldElem acc = FieldElem::one(base.degree());
    while (exponent != 0) {
        if (exponent & 1U) acc = mul(acc, base);
        base = mul(base, base);
        exponent >>= 1;
    }
    return acc;
}

// a^(2^r - 2) is the inverse of a in the multiplicative group.
inline FieldElem inv(const FieldElem& value) {
    if (value.is_zero()) throw std::domain_error("inverse of zero");
    return pow(value, (std::uint64_t{1} << value.degree()) - 2);
}

inline FieldElem operator+(const FieldElem& lhs, const FieldElem& rhs) { return add(lhs, rhs); }
inline FieldElem operator-(const FieldElem& lhs, const FieldElem& rhs) { return add(lhs, rhs); }
inline FieldElem operator*(const FieldElem& lhs, const FieldElem& rhs) { return mul(lhs, rhs); }
inline FieldElem operator/(const FieldElem& lhs, const FieldElem& rhs) { return mul(lhs, inv(rhs)); }
inline FieldElem& operator+=(FieldElem& lhs, const FieldElem& rhs) { return lhs = add(lhs, rhs); }
inline FieldElem& operator*=(FieldElem& lhs, const FieldElem& rhs) { return lhs = mul(lhs, rhs); }

// Uniform element from raw generator output; avoids std distributions, whose output is implementation-defined.
inline FieldElem random_elem(int degree, Rng& rng) {
    const std::uint64_t mask = (std::uint64_t{1} << degree) - 1;
    return {static_cast<std::uint32_t>(rng() & mask), degree};
}

inline FieldElem random_nonzero_elem(int degree, Rng& rng) {
    for (;;) {
        FieldElem candidate = random_elem(degree, rng);
        if (!candidate.is_zero()) return candidate;
    }
}

// splitmix64 finalizer, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Vector = std::vector<FieldElem>;

inline Vector zero_vector(std::size_t size, int degree) { return Vector(size, FieldElem::zero(degree)); }

inline bool is_zero_vector(const Vector& vec) {
    for (const auto& entry : vec) {
        if (!entry.is_zero()) return false;
    }
    return true;
}

inline Vector add(const Vector& lhs, const Vector& rhs) {
    if (lhs.size() != rhs.size()) throw std::invalid_argument("vector length mismatch");
    Vector out(lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) out[i] = lhs[i] + rhs[i];
    return out;
}

inline Vector scale(const FieldElem& factor, const Vector& vec) {
    Vector out(vec.size());
    for (std::size_t i = 0; i < vec.size(); ++i) out[i] = factor * vec[i];
    return out;
}

// out += factor * vec
inline void axpy(Vector& out, const FieldElem& factor, const Vector& vec) {
    if (out.size() != vec.size()) throw std::invalid_argument("vector length mismatch");
    if (factor.is_zero()) return;
    for (std::size_t i = 0; i < vec.size(); ++i) out[i] += factor * vec[i];
}

class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, int degree)
        : rows_(rows), cols_(cols), degree_(degree), entries_(rows * cols, FieldElem::zero(degree)) {}

    static Matrix identity(std::size_t size, int degree) {
        Matrix out(size, size, degree);
        for (std::size_t i = 0; i < size; ++i) out(i, i) = FieldElem::one(degree);
        return out;
    }

    static Matrix from_rows(const std::vector<Vector>& rows, std::size_t cols, int degree) {
        Matrix out(rows.size(), cols, degree);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw std::invalid_argument("ragged matrix rows");
            for (std::size_t j = 0; j < cols; ++j) out.set(i, j, rows[i][j]);
        }
        return out;
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] int degree() const { return degree_; }

    FieldElem& operator()(std::size_t row, std::size_t col) { return entries_[row * cols_ + col]; }
    const FieldElem& operator()(std::size_t row, std::size_t col) const { return entries_[row * cols_ + col]; }

    void set(std::size_t row, std::size_t col, const FieldElem& value) {
        if (value.degree() != degree_) throw std::invalid_argument("matrix entry degree mismatch");
        (*this)(row, col) = value;
    }

    [[nodiscard]] Vector row(std::size_t index) const {
        return {entries_.begin() + static_cast<std::ptrdiff_t>(index * cols_),
                entries_.begin() + static_cast<std::ptrdiff_t>((index + 1) * cols_)};
    }

    [[nodiscard]] Vector apply(const Vector& vec) const {
        if (vec.size() != cols_) throw std::invalid_argument("matrix-vector dimension mismatch");
        Vector out = zero_vector(rows_, degree_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * vec[j];
        }
        return out;
    }

    [[nodiscard]] Matrix transpose() const {
        Matrix out(cols_, rows_, degree_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    int degree_;
    std::vector<FieldElem> entries_;
};

inline Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows()) throw std::invalid_argument("matrix product dimension mismatch");
    Matrix out(lhs.rows(), rhs.cols(), lhs.degree());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            if (lhs(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += lhs(i, k) * rhs(k, j);
        }
    }
    return out;
}

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(Matrix& mat) {
    std::vector<std::size_t> pivots;
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < mat.cols() && pivot_row < mat.rows(); ++col) {
        std::size_t found = pivot_row;
        while (found < mat.rows() && mat(found, col).is_zero()) ++found;
        if (found == mat.rows()) continue;
        if (found != pivot_row) {
            for (std::size_t j = 0; j < mat.cols(); ++j) std::swap(mat(found, j), mat(pivot_row, j));
        }
        const FieldElem pivot_inv = inv(mat(pivot_row, col));
        for (std::size_t j = 0; j < mat.cols(); ++j) mat(pivot_row, j) *= pivot_inv;
        for (std::size_t i = 0; i < mat.rows(); ++i) {
            if (i == pivot_row || mat(i, col).is_zero()) continue;
            const FieldElem factor = mat(i, col);
            for (std::size_t j = 0; j < mat.cols(); ++j) mat(i, j) += factor * mat(pivot_row, j);
        }
        pivots.push_back(col);
        ++pivot_row;
    }
    return pivots;
}

inline std::size_t rank(const Matrix& mat) {
    Matrix work = mat;
    return rref(work).size();
}

inline std::size_t rank_of_rows(const std::vector<Vector>& rows, std::size_t cols, int degree) {
    if (rows.empty()) return 0;
    return rank(Matrix::from_rows(rows, cols, degree));
}

enum class SolveStatus { Unique, Family, NoSolution };

// Affine solution set {particular + span(kernel)} of A x = y.
struct SolveResult {
    SolveStatus status = SolveStatus::NoSolution;
    Vector particular;
    std::vector<Vector> kernel;

    [[nodiscard]] bool consistent() const { return status != SolveStatus::NoSolution; }

    // Uniform draw from the solution set; every solution has positive probability.
    [[nodiscard]] Vector sample(Rng& rng) const {
        if (!consistent()) throw std::logic_error("sampling an inconsistent system");
        Vector out = particular;
        for (const auto& basis : kernel) axpy(out, random_elem(basis.front().degree(), rng), basis);
        return out;
    }
};

inline SolveResult solve(const Matrix& system, const Vector& rhs) {
    if (system.rows() != rhs.size()) throw std::invalid_argument("solve: A.rows != len(y)");
    const int degree = system.degree();
    Matrix augmented(system.rows(), system.cols() + 1, degree);
    for (std::size_t i = 0; i < system.rows(); ++i) {
        for (std::size_t j = 0; j < system.cols(); ++j) augmented(i, j) = system(i, j);
        augmented.set(i, system.cols(), rhs[i]);
    }
    const auto pivots = rref(augmented);
    SolveResult result;
    if (!pivots.empty() && pivots.back() == system.cols()) return result;

    result.particular = zero_vector(system.cols(), degree);
    std::vector<bool> is_pivot(system.cols(), false);
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        is_pivot[pivots[r]] = true;
        result.particular[pivots[r]] = augmented(r, system.cols());
    }
    for (std::size_t free_col = 0; free_col < system.cols(); ++free_col) {
        if (is_pivot[free_col]) continue;
        Vector basis = zero_vector(system.cols(), degree);
        basis[free_col] = FieldElem::one(degree);
        for (std::size_t r = 0; r < pivots.size(); ++r) basis[pivots[r]] = augmented(r, free_col);
        result.kernel.push_back(std::move(basis));
    }
    result.status = result.kernel.empty() ? SolveStatus::Unique : SolveStatus::Family;
    return result;
}

inline std::optional<Vector> solve_sample(const Matrix& system, const Vector& rhs, Rng& rng) {
    const SolveResult result = solve(system, rhs);
    if (!result.consistent()) return std::nullopt;
    return result.sample(rng);
}

}  // namespace ldnet::gf
