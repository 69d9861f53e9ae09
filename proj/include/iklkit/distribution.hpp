#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "iklkit/errors.hpp"
#include "iklkit/graph.hpp"

namespace iklkit {

/// Finite discrete variable set: one cardinality (>= 2) per variable.
/// Full assignments are indexed in row-major lexicographic order, variable 0
/// most significant. The total cell count is capped by config::cell_limit().
class VariableSpace {
  public:
    explicit VariableSpace(std::vector<int> cardinalities);

    int num_vars() const { return static_cast<int>(cards_.size()); }
    int cardinality(int i) const;
    const std::vector<int>& cardinalities() const { return cards_; }
    std::size_t num_cells() const { return cells_; }
    std::size_t stride(int i) const;

    std::size_t encode(std::span<const int> assignment) const;
    void decode(std::size_t cell, std::span<int> out) const;

    // Space over a subset of variables, given in ascending index order.
    VariableSpace subspace(const std::vector<int>& vars) const;

    bool operator==(const VariableSpace&) const = default;

  private:
    std::vector<int> cards_;
    std::vector<std::size_t> strides_;
    std::size_t cells_ = 1;
};

// Maps full-space cell indices to indices over a variable subset.
class SubsetIndexer {
  public:
    SubsetIndexer(const VariableSpace& space, std::span<const int> vars);

    std::size_t size() const { return size_; }

    std::size_t project(std::size_t full_cell) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < full_stride_.size(); ++k) {
            idx += ((full_cell / full_stride_[k]) % card_[k]) * sub_stride_[k];
        }
        return idx;
    }

  private:
    std::vector<std::size_t> full_stride_, card_, sub_stride_;
    std::size_t size_ = 1;
};

/// Tabular conditional distribution of one child variable given a sorted
/// parent index set. Rows are keyed by the lexicographic parent assignment;
/// each row is a distribution over child values (sums to 1 within 1e-12).
/// Rows extracted from a joint with zero parent-marginal are marked undefined
/// and filled uniform; consumers must weight them by zero.
class Mechanism {
  public:
    Mechanism(int child, std::vector<int> parent_indices, int child_cardinality,
              std::vector<int> parent_cardinalities, std::vector<double> table,
              std::vector<std::uint8_t> row_defined = {});

    int child() const { return child_; }
    const std::vector<int>& parent_indices() const { return parents_; }
    int child_cardinality() const { return child_card_; }
    const std::vector<int>& parent_cardinalities() const { return parent_cards_; }
    std::size_t num_rows() const { return rows_; }
    std::span<const double> row(std::size_t parent_cell) const;
    bool row_defined(std::size_t parent_cell) const;
    bool fully_defined() const;
    const std::vector<double>& table() const { return table_; }

    bool operator==(const Mechanism&) const = default;

  private:
    int child_;
    std::vector<int> parents_;
    int child_card_;
    std::vector<int> parent_cards_;
    std::size_t rows_;
    std::vector<double> table_;
    std::vector<std::uint8_t> defined_;  // empty means all rows defined
};

/// Causal graphical model: a DAG plus one mechanism per variable whose parent
/// set matches the graph.
class Cgm {
  public:
    Cgm(VariableSpace space, Dag graph, std::vector<Mechanism> mechanisms);

    const VariableSpace& space() const { return space_; }
    const Dag& graph() const { return graph_; }
    const Mechanism& mechanism(int i) const;
    const std::vector<Mechanism>& mechanisms() const { return mechanisms_; }

    // Copy with one mechanism swapped; shape checks as in the constructor.
    Cgm with_mechanism(Mechanism replacement) const;

  private:
    VariableSpace space_;
    Dag graph_;
    std::vector<Mechanism> mechanisms_;
};

/// Dense exact joint distribution. Entries are nonnegative and sum to 1
/// within 1e-9.
class JointTable {
  public:
    JointTable(VariableSpace space, std::vector<double> probabilities);

    const VariableSpace& space() const { return space_; }
    std::span<const double> probabilities() const { return probs_; }
    double operator[](std::size_t cell) const { return probs_[cell]; }

  private:
    VariableSpace space_;
    std::vector<double> probs_;
};

/// Nonnegative extended real: +infinity is an ordinary value, not an error.
/// Sums propagate infinity; negative rounding noise within 1e-9 clamps to 0.
class NonNegReal {
  public:
    NonNegReal() : v_(0.0) {}
    explicit NonNegReal(double v);
    static NonNegReal infinity() { return NonNegReal(std::numeric_limits<double>::infinity()); }

    double value() const { return v_; }
    bool is_infinite() const { return v_ == std::numeric_limits<double>::infinity(); }

    NonNegReal& operator+=(NonNegReal o) {
        v_ += o.v_;
        return *this;
    }
    friend NonNegReal operator+(NonNegReal a, NonNegReal b) { return a += b; }
    auto operator<=>(const NonNegReal&) const = default;

  private:
    double v_;
};

// w * x with the measure-theoretic convention 0 * infinity = 0; w >= 0.
NonNegReal weighted(double w, NonNegReal x);

// --- Operations ------------------------------------------------------------

// Markov factorization: probabilities(x) = prod_i mech_i(x_i | pa_i(x)).
JointTable joint_from_model(const Cgm& m);

// Product of arbitrary conditional factors (one per variable) over a space;
// factors are multiplied per cell in the given evaluation order.
JointTable joint_from_factors(const VariableSpace& space, const std::vector<Mechanism>& factors,
                              const std::vector<int>& order);

// Sums out everything not in keep; kept variables keep their relative order.
JointTable marginalize(const JointTable& p, const std::vector<int>& keep);

// P(child | given) as a Mechanism over p's variable indices. Zero-probability
// parent rows come back undefined (uniform-filled).
Mechanism conditional(const JointTable& p, int child, const std::vector<int>& given);

// KL divergence in nats; +infinity iff p puts mass where q has none.
NonNegReal kl(const JointTable& p, const JointTable& q);

// sum_z outer(z) * KL(left(child | z) || right(child | z)) over assignments z
// of parent_set. Zero-weight rows contribute 0; a positive-weight row with an
// undefined right conditional yields +infinity.
NonNegReal expected_conditional_kl(const JointTable& outer, const JointTable& left,
                                   const JointTable& right, int child,
                                   const std::vector<int>& parent_set);

/// Markov projection of p onto g: the KL-closest distribution among those
/// Markovian w.r.t. g, computed as prod_i P(X_i | PA_i^g).
JointTable markov_project(const JointTable& p, const Dag& g);

bool is_markov(const JointTable& p, const Dag& g, double tol);

// Exact conditional mutual information I(X_i; X_j | Z) in nats.
double conditional_mutual_information(const JointTable& p, int i, int j,
                                      const std::vector<int>& z);

/// True iff every conditional independence in p (CMI <= tol, over all pairs
/// and all conditioning sets) is matched by a d-separation in g.
bool is_faithful(const JointTable& p, const Dag& g, double tol, int max_vars = 7);

// Convenience wrappers over the deterministic kernels.
double total_variation(const JointTable& p, const JointTable& q);
double max_abs_diff(const JointTable& p, const JointTable& q);
double expectation(const JointTable& p, std::span<const double> f);

}  // namespace iklkit
