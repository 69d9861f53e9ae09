#include "iklkit/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iklkit/kernels.hpp"

namespace iklkit {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kJointSumTol = 1e-9;

std::vector<int> sorted_unique(std::vector<int> v, const char* what) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw InputError(std::string(what) + " contains duplicate indices");
    }
    return v;
}

void check_var_range(const VariableSpace& space, const std::vector<int>& vars, const char* what) {
    for (int v : vars) {
        if (v < 0 || v >= space.num_vars()) {
            throw InputError(std::string(what) + " index " + std::to_string(v) + " out of range");
        }
    }
}

void check_same_space(const VariableSpace& a, const VariableSpace& b) {
    if (!(a == b)) throw InputError("variable spaces do not match");
}

std::vector<int> complement(int d, const std::vector<int>& sorted_vars) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(d) - sorted_vars.size());
    std::size_t k = 0;
    for (int v = 0; v < d; ++v) {
        if (k < sorted_vars.size() && sorted_vars[k] == v) {
            ++k;
        } else {
            out.push_back(v);
        }
    }
    return out;
}

// Offsets of all assignments to `vars` within the full-space index, in
// lexicographic order of the assignment.
std::vector<std::size_t> assignment_offsets(const VariableSpace& space,
                                            const std::vector<int>& vars) {
    std::size_t count = 1;
    for (int v : vars) count *= static_cast<std::size_t>(space.cardinality(v));
    std::vector<std::size_t> offsets(count, 0);
    std::vector<int> values(vars.size(), 0);
    for (std::size_t t = 0; t < count; ++t) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < vars.size(); ++k) {
            off += static_cast<std::size_t>(values[k]) * space.stride(vars[k]);
        }
        offsets[t] = off;
        for (std::size_t k = vars.size(); k-- > 0;) {
            if (++values[k] < space.cardinality(vars[k])) break;
            values[k] = 0;
        }
    }
    return offsets;
}

}  // namespace

VariableSpace::VariableSpace(std::vector<int> cardinalities) : cards_(std::move(cardinalities)) {
    if (cards_.empty()) throw InputError("variable space needs at least one variable");
    const std::size_t limit = config::cell_limit();
    for (int c : cards_) {
        if (c < 2) throw InputError("cardinalities must be at least 2");
        if (cells_ > limit / static_cast<std::size_t>(c)) {
            throw CapacityError("joint table would exceed the cell limit of " +
                                std::to_string(limit));
        }
        cells_ *= static_cast<std::size_t>(c);
    }
    strides_.assign(cards_.size(), 1);
    for (std::size_t i = cards_.size() - 1; i-- > 0;) {
        strides_[i] = strides_[i + 1] * static_cast<std::size_t>(cards_[i + 1]);
    }
}

int VariableSpace::cardinality(int i) const {
    if (i < 0 || i >= num_vars()) {
        throw InputError("variable index " + std::to_string(i) + " out of range");
    }
    return cards_[static_cast<std::size_t>(i)];
}

std::size_t VariableSpace::stride(int i) const {
    if (i < 0 || i >= num_vars()) {
        throw InputError("variable index " + std::to_string(i) + " out of range");
    }
    return strides_[static_cast<std::size_t>(i)];
}

std::size_t VariableSpace::encode(std::span<const int> assignment) const {
    if (assignment.size() != cards_.size()) throw InputError("assignment length mismatch");
    std::size_t cell = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        if (assignment[i] < 0 || assignment[i] >= cards_[i]) {
            throw InputError("assignment value out of range at variable " + std::to_string(i));
        }
        cell += static_cast<std::size_t>(assignment[i]) * strides_[i];
    }
    return cell;
}

void VariableSpace::decode(std::size_t cell, std::span<int> out) const {
    if (cell >= cells_) throw InputError("cell index out of range");
    if (out.size() != cards_.size()) throw InputError("assignment length mismatch");
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        out[i] = static_cast<int>((cell / strides_[i]) % static_cast<std::size_t>(cards_[i]));
    }
}

VariableSpace VariableSpace::subspace(const std::vector<int>& vars) const {
    check_var_range(*this, vars, "subspace");
    if (!std::is_sorted(vars.begin(), vars.end()) ||
        std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
        throw InputError("subspace variables must be strictly ascending");
    }
    std::vector<int> cards;
    cards.reserve(vars.size());
    for (int v : vars) cards.push_back(cardinality(v));
    return VariableSpace(std::move(cards));
}

SubsetIndexer::SubsetIndexer(const VariableSpace& space, std::span<const int> vars) {
    full_stride_.reserve(vars.size());
    card_.reserve(vars.size());
    for (int v : vars) {
        full_stride_.push_back(space.stride(v));
        card_.push_back(static_cast<std::size_t>(space.cardinality(v)));
        size_ *= static_cast<std::size_t>(space.cardinality(v));
    }
    sub_stride_.assign(vars.size(), 1);
    for (std::size_t k = vars.size(); k-- > 1;) {
        sub_stride_[k - 1] = sub_stride_[k] * card_[k];
    }
}

Mechanism::Mechanism(int child, std::vector<int> parent_indices, int child_cardinality,
                     std::vector<int> parent_cardinalities, std::vector<double> table,
                     std::vector<std::uint8_t> row_defined)
    : child_(child),
      parents_(std::move(parent_indices)),
      child_card_(child_cardinality),
      parent_cards_(std::move(parent_cardinalities)),
      table_(std::move(table)),
      defined_(std::move(row_defined)) {
    if (child_ < 0) throw InputError("mechanism child index must be nonnegative");
    if (child_card_ < 2) throw InputError("mechanism child cardinality must be at least 2");
    if (parents_.size() != parent_cards_.size()) {
        throw InputError("mechanism parent index/cardinality length mismatch");
    }
    if (!std::is_sorted(parents_.begin(), parents_.end()) ||
        std::adjacent_find(parents_.begin(), parents_.end()) != parents_.end()) {
        throw InputError("mechanism parent indices must be strictly ascending");
    }
    for (std::size_t k = 0; k < parents_.size(); ++k) {
        if (parents_[k] == child_) throw InputError("mechanism child cannot be its own parent");
        if (parent_cards_[k] < 2) throw InputError("cardinalities must be at least 2");
    }
    rows_ = 1;
    for (int c : parent_cards_) rows_ *= static_cast<std::size_t>(c);
    if (table_.size() != rows_ * static_cast<std::size_t>(child_card_)) {
        throw InputError("mechanism table size does not match its dimensions");
    }
    if (!defined_.empty() && defined_.size() != rows_) {
        throw InputError("mechanism row flags do not match the row count");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int c = 0; c < child_card_; ++c) {
            const double v = table_[r * static_cast<std::size_t>(child_card_) +
                                    static_cast<std::size_t>(c)];
            if (v < 0.0 || !std::isfinite(v)) {
                throw InputError("mechanism probabilities must be finite and nonnegative");
            }
            s += v;
        }
        if (std::abs(s - 1.0) > kRowSumTol) {
            throw InputError("mechanism row " + std::to_string(r) + " sums to " +
                             std::to_string(s) + ", expected 1");
        }
    }
}

std::span<const double> Mechanism::row(std::size_t parent_cell) const {
    if (parent_cell >= rows_) throw InputError("mechanism row index out of range");
    return {table_.data() + parent_cell * static_cast<std::size_t>(child_card_),
            static_cast<std::size_t>(child_card_)};
}

bool Mechanism::row_defined(std::size_t parent_cell) const {
    if (parent_cell >= rows_) throw InputError("mechanism row index out of range");
    return defined_.empty() || defined_[parent_cell] != 0;
}

bool Mechanism::fully_defined() const {
    return defined_.empty() ||
           std::all_of(defined_.begin(), defined_.end(), [](std::uint8_t d) { return d != 0; });
}

Cgm::Cgm(VariableSpace space, Dag graph, std::vector<Mechanism> mechanisms)
    : space_(std::move(space)), graph_(std::move(graph)), mechanisms_(std::move(mechanisms)) {
    const int d = space_.num_vars();
    if (graph_.num_vars() != d) throw InputError("graph and space dimension mismatch");
    if (static_cast<int>(mechanisms_.size()) != d) {
        throw InputError("expected one mechanism per variable");
    }
    for (int i = 0; i < d; ++i) {
        const Mechanism& m = mechanisms_[static_cast<std::size_t>(i)];
        if (m.child() != i) throw InputError("mechanism order must follow variable indices");
        if (m.parent_indices() != graph_.parents(i)) {
            throw InputError("mechanism parents of variable " + std::to_string(i) +
                             " do not match the graph");
        }
        if (m.child_cardinality() != space_.cardinality(i)) {
            throw InputError("mechanism child cardinality mismatch at variable " +
                             std::to_string(i));
        }
        for (std::size_t k = 0; k < m.parent_indices().size(); ++k) {
            if (m.parent_cardinalities()[k] != space_.cardinality(m.parent_indices()[k])) {
                throw InputError("mechanism parent cardinality mismatch at variable " +
                                 std::to_string(i));
            }
        }
    }
}

const Mechanism& Cgm::mechanism(int i) const {
    if (i < 0 || i >= space_.num_vars()) {
        throw InputError("variable index " + std::to_string(i) + " out of range");
    }
    return mechanisms_[static_cast<std::size_t>(i)];
}

Cgm Cgm::with_mechanism(Mechanism replacement) const {
    std::vector<Mechanism> mechs = mechanisms_;
    const int i = replacement.child();
    if (i < 0 || i >= space_.num_vars()) {
        throw InputError("replacement child index out of range");
    }
    mechs[static_cast<std::size_t>(i)] = std::move(replacement);
    return Cgm(space_, graph_, std::move(mechs));
}

JointTable::JointTable(VariableSpace space, std::vector<double> probabilities)
    : space_(std::move(space)), probs_(std::move(probabilities)) {
    if (probs_.size() != space_.num_cells()) {
        throw InputError("joint table size does not match the space");
    }
    for (double v : probs_) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw InputError("joint probabilities must be finite and nonnegative");
        }
    }
    const double s = kernels::sum(probs_);
    if (std::abs(s - 1.0) > kJointSumTol) {
        throw InputError("joint table sums to " + std::to_string(s) + ", expected 1");
    }
}

NonNegReal::NonNegReal(double v) : v_(v) {
    if (std::isnan(v_)) throw InputError("NaN is not a valid divergence value");
    if (v_ < 0.0) {
        if (v_ < -1e-9) throw InputError("divergence value is negative beyond rounding noise");
        v_ = 0.0;
    }
}

NonNegReal weighted(double w, NonNegReal x) {
    if (w < 0.0) throw InputError("weights must be nonnegative");
    if (w == 0.0) return NonNegReal(0.0);
    return NonNegReal(w * x.value());
}

JointTable joint_from_factors(const VariableSpace& space, const std::vector<Mechanism>& factors,
                              const std::vector<int>& order) {
    const int d = space.num_vars();
    if (static_cast<int>(factors.size()) != d) throw InputError("expected one factor per variable");
    if (static_cast<int>(order.size()) != d) throw InputError("evaluation order length mismatch");
    struct FactorView {
        SubsetIndexer rows;
        const double* table;
        std::size_t child_stride;
        std::size_t child_card;
    };
    std::vector<FactorView> views;
    views.reserve(static_cast<std::size_t>(d));
    for (int idx : order) {
        const Mechanism& m = factors[static_cast<std::size_t>(idx)];
        if (m.child() != idx) throw InputError("factor order must follow child indices");
        views.push_back({SubsetIndexer(space, m.parent_indices()), m.table().data(),
                         space.stride(idx), static_cast<std::size_t>(space.cardinality(idx))});
    }
    std::vector<double> probs(space.num_cells());
    kernels::for_each_cell(space.num_cells(), [&](std::size_t cell) {
        double p = 1.0;
        for (const FactorView& f : views) {
            const std::size_t row = f.rows.project(cell);
            const std::size_t value = (cell / f.child_stride) % f.child_card;
            p *= f.table[row * f.child_card + value];
        }
        probs[cell] = p;
    });
    return JointTable(space, std::move(probs));
}

JointTable joint_from_model(const Cgm& m) {
    return joint_from_factors(m.space(), m.mechanisms(), m.graph().topological_order());
}

JointTable marginalize(const JointTable& p, const std::vector<int>& keep) {
    if (keep.empty()) throw InputError("marginalization must keep at least one variable");
    const auto kept = sorted_unique(keep, "keep set");
    check_var_range(p.space(), kept, "keep");
    if (static_cast<int>(kept.size()) == p.space().num_vars()) {
        return p;
    }
    const VariableSpace out_space = p.space().subspace(kept);
    const auto dropped = complement(p.space().num_vars(), kept);
    const auto drop_offsets = assignment_offsets(p.space(), dropped);
    const auto keep_offsets = assignment_offsets(p.space(), kept);
    const double* in = p.probabilities().data();
    std::vector<double> out(out_space.num_cells());
    kernels::for_each_cell(out_space.num_cells(), [&](std::size_t o) {
        const std::size_t base = keep_offsets[o];
        double s = 0.0;
        for (const std::size_t off : drop_offsets) s += in[base + off];
        out[o] = s;
    });
    return JointTable(out_space, std::move(out));
}

Mechanism conditional(const JointTable& p, int child, const std::vector<int>& given) {
    const auto parents = sorted_unique(given, "conditioning set");
    check_var_range(p.space(), parents, "conditioning");
    if (child < 0 || child >= p.space().num_vars()) {
        throw InputError("child index " + std::to_string(child) + " out of range");
    }
    if (std::binary_search(parents.begin(), parents.end(), child)) {
        throw InputError("child cannot appear in its conditioning set");
    }

    std::vector<int> kept = parents;
    kept.insert(std::upper_bound(kept.begin(), kept.end(), child), child);
    const JointTable marg = marginalize(p, kept);

    const std::size_t child_pos =
        static_cast<std::size_t>(std::lower_bound(kept.begin(), kept.end(), child) - kept.begin());
    const std::size_t ccard = static_cast<std::size_t>(p.space().cardinality(child));
    const std::size_t child_stride = marg.space().stride(static_cast<int>(child_pos));

    std::vector<int> parent_cards;
    std::vector<std::size_t> parent_strides;  // strides within marg for each parent
    parent_cards.reserve(parents.size());
    parent_strides.reserve(parents.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        if (k == child_pos) continue;
        parent_cards.push_back(p.space().cardinality(kept[k]));
        parent_strides.push_back(marg.space().stride(static_cast<int>(k)));
    }

    std::size_t rows = 1;
    for (int c : parent_cards) rows *= static_cast<std::size_t>(c);
    std::vector<double> table(rows * ccard);
    std::vector<std::uint8_t> defined(rows, 1);
    bool all_defined = true;

    std::vector<int> values(parents.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t base = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
            base += static_cast<std::size_t>(values[k]) * parent_strides[k];
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < ccard; ++c) denom += marg[base + c * child_stride];
        if (denom > 0.0) {
            for (std::size_t c = 0; c < ccard; ++c) {
                table[r * ccard + c] = marg[base + c * child_stride] / denom;
            }
        } else {
            for (std::size_t c = 0; c < ccard; ++c) {
                table[r * ccard + c] = 1.0 / static_cast<double>(ccard);
            }
            defined[r] = 0;
            all_defined = false;
        }
        for (std::size_t k = parents.size(); k-- > 0;) {
            if (++values[k] < parent_cards[k]) break;
            values[k] = 0;
        }
    }
    // Normalize rows exactly: division can leave 1-ulp drift past the 1e-12 gate.
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < ccard; ++c) s += table[r * ccard + c];
        if (s > 0.0 && s != 1.0) {
            for (std::size_t c = 0; c < ccard; ++c) table[r * ccard + c] /= s;
        }
    }
    return Mechanism(child, parents, static_cast<int>(ccard), parent_cards, std::move(table),
                     all_defined ? std::vector<std::uint8_t>{} : std::move(defined));
}

NonNegReal kl(const JointTable& p, const JointTable& q) {
    check_same_space(p.space(), q.space());
    const double v = kernels::kl(p.probabilities(), q.probabilities());
    return std::isinf(v) ? NonNegReal::infinity() : NonNegReal(v);
}

NonNegReal expected_conditional_kl(const JointTable& outer, const JointTable& left,
                                   const JointTable& right, int child,
                                   const std::vector<int>& parent_set) {
    check_same_space(outer.space(), left.space());
    check_same_space(outer.space(), right.space());
    const auto parents = sorted_unique(parent_set, "parent set");
    check_var_range(outer.space(), parents, "parent");
    if (std::binary_search(parents.begin(), parents.end(), child)) {
        throw InputError("child cannot appear in its parent set");
    }
    if (parents.empty()) {
        return kl(marginalize(left, {child}), marginalize(right, {child}));
    }

    const JointTable weights = marginalize(outer, parents);
    const Mechanism lc = conditional(left, child, parents);
    const Mechanism rc = conditional(right, child, parents);
    const std::size_t rows = weights.space().num_cells();
    std::vector<double> terms(rows, 0.0);
    std::vector<std::uint8_t> left_undefined(rows, 0);
    kernels::for_each_cell(rows, [&](std::size_t r) {
        const double w = weights[r];
        if (w == 0.0) return;
        if (!lc.row_defined(r)) {
            left_undefined[r] = 1;
            return;
        }
        if (!rc.row_defined(r)) {
            terms[r] = std::numeric_limits<double>::infinity();
            return;
        }
        terms[r] = w * kernels::kl_serial(lc.row(r), rc.row(r));
    });
    for (std::size_t r = 0; r < rows; ++r) {
        if (left_undefined[r]) {
            throw InputError("left conditional undefined on a positive-weight parent row " +
                             std::to_string(r));
        }
    }
    const double total = kernels::sum(terms);
    return std::isinf(total) ? NonNegReal::infinity() : NonNegReal(total);
}

JointTable markov_project(const JointTable& p, const Dag& g) {
    if (g.num_vars() != p.space().num_vars()) {
        throw InputError("graph and distribution dimension mismatch");
    }
    std::vector<Mechanism> factors;
    factors.reserve(static_cast<std::size_t>(g.num_vars()));
    for (int i = 0; i < g.num_vars(); ++i) {
        factors.push_back(conditional(p, i, g.parents(i)));
    }
    return joint_from_factors(p.space(), factors, g.topological_order());
}

bool is_markov(const JointTable& p, const Dag& g, double tol) {
    if (tol <= 0.0) throw InputError("tolerance must be positive");
    return kl(p, markov_project(p, g)) <= NonNegReal(tol);
}

double conditional_mutual_information(const JointTable& p, int i, int j,
                                      const std::vector<int>& z) {
    if (i == j) throw InputError("mutual information needs two distinct variables");
    auto cond = sorted_unique(z, "conditioning set");
    check_var_range(p.space(), cond, "conditioning");
    check_var_range(p.space(), {i, j}, "variable");
    if (std::binary_search(cond.begin(), cond.end(), i) ||
        std::binary_search(cond.begin(), cond.end(), j)) {
        throw InputError("conditioning set must exclude the variable pair");
    }

    std::vector<int> all = cond;
    all.push_back(i);
    all.push_back(j);
    std::sort(all.begin(), all.end());
    const JointTable mij = marginalize(p, all);

    auto positions = [&](const std::vector<int>& subset) {
        std::vector<int> pos;
        pos.reserve(subset.size());
        for (int v : subset) {
            pos.push_back(static_cast<int>(std::lower_bound(all.begin(), all.end(), v) -
                                           all.begin()));
        }
        return pos;
    };
    std::vector<int> iz = cond, jz = cond;
    iz.insert(std::upper_bound(iz.begin(), iz.end(), i), i);
    jz.insert(std::upper_bound(jz.begin(), jz.end(), j), j);

    const JointTable m_iz = marginalize(p, iz);
    const JointTable m_jz = marginalize(p, jz);
    const SubsetIndexer idx_iz(mij.space(), positions(iz));
    const SubsetIndexer idx_jz(mij.space(), positions(jz));

    const bool have_z = !cond.empty();
    std::vector<double> pz_storage;
    SubsetIndexer idx_z(mij.space(), positions(cond));
    if (have_z) {
        const JointTable m_z = marginalize(p, cond);
        pz_storage.assign(m_z.probabilities().begin(), m_z.probabilities().end());
    }

    double cmi = 0.0;
    for (std::size_t cell = 0; cell < mij.space().num_cells(); ++cell) {
        const double pij = mij[cell];
        if (pij <= 0.0) continue;
        const double piz = m_iz[idx_iz.project(cell)];
        const double pjz = m_jz[idx_jz.project(cell)];
        const double pz = have_z ? pz_storage[idx_z.project(cell)] : 1.0;
        cmi += pij * std::log((pij * pz) / (piz * pjz));
    }
    return std::max(cmi, 0.0);
}

bool is_faithful(const JointTable& p, const Dag& g, double tol, int max_vars) {
    if (tol <= 0.0) throw InputError("tolerance must be positive");
    const int d = p.space().num_vars();
    if (g.num_vars() != d) throw InputError("graph and distribution dimension mismatch");
    if (d > max_vars) {
        throw CapacityError("faithfulness check limited to " + std::to_string(max_vars) +
                            " variables, got " + std::to_string(d));
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            std::vector<int> rest;
            for (int v = 0; v < d; ++v) {
                if (v != i && v != j) rest.push_back(v);
            }
            const std::size_t subsets = std::size_t{1} << rest.size();
            for (std::size_t mask = 0; mask < subsets; ++mask) {
                std::vector<int> z;
                for (std::size_t k = 0; k < rest.size(); ++k) {
                    if (mask & (std::size_t{1} << k)) z.push_back(rest[k]);
                }
                if (conditional_mutual_information(p, i, j, z) <= tol &&
                    !d_separated(g, {i}, {j}, z)) {
                    return false;
                }
            }
        }
    }
    return true;
}

double total_variation(const JointTable& p, const JointTable& q) {
    check_same_space(p.space(), q.space());
    return kernels::total_variation(p.probabilities(), q.probabilities());
}

double max_abs_diff(const JointTable& p, const JointTable& q) {
    check_same_space(p.space(), q.space());
    return kernels::max_abs_diff(p.probabilities(), q.probabilities());
}

double expectation(const JointTable& p, std::span<const double> f) {
    if (f.size() != p.space().num_cells()) {
        throw InputError("statistic length does not match the joint table");
    }
    return kernels::dot(p.probabilities(), f);
}

}  // namespace iklkit
