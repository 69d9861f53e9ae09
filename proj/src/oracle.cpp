#include "iklkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace iklkit::oracle {

namespace {

constexpr double kFloor = 1e-3;  // lower bound on generated probabilities

void check_config(const OracleConfig& cfg) {
    if (cfg.max_vars < 1 || cfg.max_vars > 7) {
        throw InputError("oracle max_vars must lie in [1, 7]");
    }
    if (cfg.max_cardinality < 2) throw InputError("oracle max_cardinality must be at least 2");
    if (cfg.min_shift_tv <= 0.0 || cfg.min_shift_tv >= 0.5) {
        throw InputError("oracle min_shift_tv must lie in (0, 0.5)");
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 make_rng(const OracleConfig& cfg, std::uint64_t salt) {
    return std::mt19937_64(splitmix64(cfg.seed ^ splitmix64(salt)));
}

// Dirichlet(1)-style row with a 1e-3 floor mixed in.
std::vector<double> random_row(std::mt19937_64& rng, int card) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> row(static_cast<std::size_t>(card));
    double sum = 0.0;
    for (double& v : row) {
        v = exp1(rng);
        sum += v;
    }
    const double keep = 1.0 - static_cast<double>(card) * kFloor;
    for (double& v : row) v = keep * (v / sum) + kFloor;
    return row;
}

double row_tv(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

Mechanism random_mechanism(std::mt19937_64& rng, int child, const std::vector<int>& parents,
                           int child_card, const std::vector<int>& parent_cards) {
    std::size_t rows = 1;
    for (int c : parent_cards) rows *= static_cast<std::size_t>(c);
    std::vector<double> table;
    table.reserve(rows * static_cast<std::size_t>(child_card));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = random_row(rng, child_card);
        table.insert(table.end(), row.begin(), row.end());
    }
    return Mechanism(child, parents, child_card, parent_cards, std::move(table));
}

Mechanism shifted_mechanism(std::mt19937_64& rng, const Mechanism& original, double min_tv) {
    const int card = original.child_cardinality();
    std::vector<double> table(original.table().size());
    for (std::size_t r = 0; r < original.num_rows(); ++r) {
        std::vector<double> row;
        bool ok = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            row = random_row(rng, card);
            if (row_tv(row, original.row(r)) >= min_tv) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw GenerationError("could not draw a mechanism row at TV >= " +
                                  std::to_string(min_tv));
        }
        std::copy(row.begin(), row.end(),
                  table.begin() + static_cast<std::ptrdiff_t>(r * static_cast<std::size_t>(card)));
    }
    return Mechanism(original.child(), original.parent_indices(), card,
                     original.parent_cardinalities(), std::move(table));
}

// Probability of one full assignment straight off the mechanism tables.
double assignment_probability(const Cgm& m, const std::vector<int>& assignment) {
    double p = 1.0;
    for (int i = 0; i < m.space().num_vars(); ++i) {
        const Mechanism& mech = m.mechanism(i);
        std::size_t row = 0;
        for (std::size_t k = 0; k < mech.parent_indices().size(); ++k) {
            row = row * static_cast<std::size_t>(mech.parent_cardinalities()[k]) +
                  static_cast<std::size_t>(
                      assignment[static_cast<std::size_t>(mech.parent_indices()[k])]);
        }
        p *= mech.row(row)[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }
    return p;
}

// Odometer over full assignments in lexicographic order.
bool advance(std::vector<int>& assignment, const std::vector<int>& cards) {
    for (std::size_t k = assignment.size(); k-- > 0;) {
        if (++assignment[k] < cards[k]) return true;
        assignment[k] = 0;
    }
    return false;
}

}  // namespace

JointTable brute_force_joint(const Cgm& m) {
    const auto& cards = m.space().cardinalities();
    std::vector<double> probs;
    probs.reserve(m.space().num_cells());
    std::vector<int> assignment(cards.size(), 0);
    do {
        probs.push_back(assignment_probability(m, assignment));
    } while (advance(assignment, cards));
    return JointTable(m.space(), std::move(probs));
}

NonNegReal brute_force_kl(const JointTable& p, const JointTable& q) {
    if (!(p.space() == q.space())) throw InputError("variable spaces do not match");
    double s = 0.0;
    for (std::size_t x = 0; x < p.space().num_cells(); ++x) {
        if (p[x] > 0.0) {
            if (q[x] <= 0.0) return NonNegReal::infinity();
            s += p[x] * std::log(p[x] / q[x]);
        }
    }
    return NonNegReal(s);
}

double verify_decomposition(const Environment& p_env, const Cgm& q) {
    const JointTable& pe = p_env.distribution();
    const JointTable qj = brute_force_joint(q);
    const NonNegReal direct = brute_force_kl(pe, qj);
    if (direct.is_infinite()) {
        throw InputError("verify_decomposition requires a finite-KL instance");
    }

    const auto& cards = q.space().cardinalities();
    const int d = q.space().num_vars();

    // One sweep per variable accumulates the joint masses of (pa_i, x_i)
    // under P^e and Q; terms and residual both read these tables.
    std::vector<std::vector<double>> pe_cell(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> q_cell(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> pe_row(static_cast<std::size_t>(d));
    std::vector<std::size_t> ccards(static_cast<std::size_t>(d));
    auto row_of = [&](int i, const std::vector<int>& assignment) {
        std::size_t row = 0;
        for (int p : q.graph().parents(i)) {
            row = row * static_cast<std::size_t>(cards[static_cast<std::size_t>(p)]) +
                  static_cast<std::size_t>(assignment[static_cast<std::size_t>(p)]);
        }
        return row;
    };
    for (int i = 0; i < d; ++i) {
        std::size_t rows = 1;
        for (int p : q.graph().parents(i)) {
            rows *= static_cast<std::size_t>(cards[static_cast<std::size_t>(p)]);
        }
        const std::size_t ccard = static_cast<std::size_t>(cards[static_cast<std::size_t>(i)]);
        ccards[static_cast<std::size_t>(i)] = ccard;
        pe_cell[static_cast<std::size_t>(i)].assign(rows * ccard, 0.0);
        q_cell[static_cast<std::size_t>(i)].assign(rows * ccard, 0.0);
        pe_row[static_cast<std::size_t>(i)].assign(rows, 0.0);
        std::vector<int> assignment(static_cast<std::size_t>(d), 0);
        std::size_t x = 0;
        do {
            const std::size_t slot =
                row_of(i, assignment) * ccard +
                static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)]);
            pe_cell[static_cast<std::size_t>(i)][slot] += pe[x];
            q_cell[static_cast<std::size_t>(i)][slot] += qj[x];
            ++x;
        } while (advance(assignment, cards));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ccard; ++c) {
                pe_row[static_cast<std::size_t>(i)][r] +=
                    pe_cell[static_cast<std::size_t>(i)][r * ccard + c];
            }
        }
    }

    double term_sum = 0.0;
    for (int i = 0; i < d; ++i) {
        const std::size_t ccard = ccards[static_cast<std::size_t>(i)];
        const auto& pc = pe_cell[static_cast<std::size_t>(i)];
        const auto& qc = q_cell[static_cast<std::size_t>(i)];
        for (std::size_t r = 0; r < pe_row[static_cast<std::size_t>(i)].size(); ++r) {
            const double prow = pe_row[static_cast<std::size_t>(i)][r];
            if (prow <= 0.0) continue;
            double qrow = 0.0;
            for (std::size_t c = 0; c < ccard; ++c) qrow += qc[r * ccard + c];
            for (std::size_t c = 0; c < ccard; ++c) {
                const double pxz = pc[r * ccard + c];
                if (pxz <= 0.0) continue;
                term_sum += pxz * std::log((pxz / prow) / (qc[r * ccard + c] / qrow));
            }
        }
    }

    // Residual: KL(P^e || prod_i P^e(X_i | PA_i^{G_Q})).
    double residual = 0.0;
    {
        std::vector<int> assignment(static_cast<std::size_t>(d), 0);
        std::size_t x = 0;
        do {
            if (pe[x] > 0.0) {
                double proj = 1.0;
                for (int i = 0; i < d; ++i) {
                    const std::size_t ccard = ccards[static_cast<std::size_t>(i)];
                    const std::size_t r = row_of(i, assignment);
                    const std::size_t slot =
                        r * ccard +
                        static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)]);
                    proj *= pe_cell[static_cast<std::size_t>(i)][slot] /
                            pe_row[static_cast<std::size_t>(i)][r];
                }
                residual += pe[x] * std::log(pe[x] / proj);
            }
            ++x;
        } while (advance(assignment, cards));
    }

    return std::abs((term_sum + residual) - direct.value());
}

Dag random_dag(const OracleConfig& cfg, int d, std::uint64_t salt) {
    check_config(cfg);
    auto rng = make_rng(cfg, splitmix64(salt) ^ 0xda6ULL);
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution coin(0.5);
    std::vector<Edge> edges;
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            if (coin(rng)) {
                edges.emplace_back(order[static_cast<std::size_t>(a)],
                                   order[static_cast<std::size_t>(b)]);
            }
        }
    }
    return Dag(d, edges);
}

Cgm random_cgm_on(const OracleConfig& cfg, const Dag& g, const VariableSpace& space,
                  std::uint64_t salt) {
    check_config(cfg);
    auto rng = make_rng(cfg, splitmix64(salt) ^ 0xc93ULL);
    std::vector<Mechanism> mechs;
    mechs.reserve(static_cast<std::size_t>(g.num_vars()));
    for (int i = 0; i < g.num_vars(); ++i) {
        const auto& parents = g.parents(i);
        std::vector<int> parent_cards;
        parent_cards.reserve(parents.size());
        for (int p : parents) parent_cards.push_back(space.cardinality(p));
        mechs.push_back(random_mechanism(rng, i, parents, space.cardinality(i), parent_cards));
    }
    return Cgm(space, g, std::move(mechs));
}

Cgm random_cgm(const OracleConfig& cfg) {
    check_config(cfg);
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto rng = make_rng(cfg, 0x5eedULL + static_cast<std::uint64_t>(attempt));
        const int d = cfg.max_vars <= 2
                          ? cfg.max_vars
                          : std::uniform_int_distribution<int>(2, cfg.max_vars)(rng);
        std::vector<int> cards(static_cast<std::size_t>(d));
        std::uniform_int_distribution<int> card_dist(2, cfg.max_cardinality);
        for (int& c : cards) c = card_dist(rng);
        const VariableSpace space(cards);
        const Dag g = random_dag(cfg, d, 0x9a1fULL + static_cast<std::uint64_t>(attempt));
        Cgm model =
            random_cgm_on(cfg, g, space, 0x3b7ULL + static_cast<std::uint64_t>(attempt));
        if (is_faithful(brute_force_joint(model), g, 1e-9)) return model;
    }
    throw GenerationError("faithfulness filter rejected 100 consecutive draws");
}

Cgm with_shifted_mechanism(const OracleConfig& cfg, const Cgm& m, int target,
                           std::uint64_t salt) {
    check_config(cfg);
    auto rng = make_rng(cfg, splitmix64(salt) ^ 0x5f7ULL ^ static_cast<std::uint64_t>(target));
    return m.with_mechanism(shifted_mechanism(rng, m.mechanism(target), cfg.min_shift_tv));
}

EnvironmentSet random_environment_set(const OracleConfig& cfg, const Cgm& m, int count) {
    check_config(cfg);
    if (count < 1) throw InputError("environment count must be at least 1");
    const int d = m.space().num_vars();
    std::vector<Environment> envs;
    envs.push_back(Environment("e0", m.space(), {}, brute_force_joint(m)));
    for (int k = 1; k < count; ++k) {
        auto rng = make_rng(cfg, 0xe57ULL + static_cast<std::uint64_t>(k));
        std::vector<int> targets;
        std::bernoulli_distribution pick(0.5);
        while (targets.empty()) {
            for (int v = 0; v < d; ++v) {
                if (pick(rng)) targets.push_back(v);
            }
        }
        Cgm shifted = m;
        std::vector<Intervention> interventions;
        for (int t : targets) {
            Mechanism repl = shifted_mechanism(rng, m.mechanism(t), cfg.min_shift_tv);
            interventions.push_back(Intervention::replace(repl));
            shifted = shifted.with_mechanism(std::move(repl));
        }
        envs.push_back(Environment("e" + std::to_string(k), m.space(), targets,
                                   brute_force_joint(shifted), std::move(interventions)));
    }
    return EnvironmentSet(std::move(envs));
}

}  // namespace iklkit::oracle
