#include "kac/hierarchy.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <unsupported/Eigen/MatrixFunctions>

#include "kac/initial_data.hpp"

namespace kac {

// ---------------------------------------------------------------------------
// Bases and states
// ---------------------------------------------------------------------------

int ClassifierBasis::index_of(const Classifier& r) const {
    auto it = std::lower_bound(all.begin(), all.end(), r, std::greater<Classifier>());
    if (it == all.end() || !(*it == r))
        throw index_error("classifier " + r.to_string() + " not in basis of order " +
                          std::to_string(order));
    return static_cast<int>(it - all.begin());
}

const ClassifierBasis& order_basis(int n) {
    static std::map<int, std::unique_ptr<ClassifierBasis>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto basis = std::make_unique<ClassifierBasis>();
        basis->order = n;
        basis->all = enumerate_classifiers(n);
        it = cache.emplace(n, std::move(basis)).first;
    }
    return *it->second;
}

CumulantState CumulantState::zeros(int n_star) {
    CumulantState s;
    s.values.resize(n_star);
    for (int n = 1; n <= n_star; ++n)
        s.values[n - 1].assign(order_basis(n).all.size(), 0.0);
    return s;
}

double CumulantState::value(int order, const Classifier& r) const {
    return values[order - 1][order_basis(order).index_of(r)];
}

double CumulantState::nonrepeated(int order) const {
    return values[order - 1][order_basis(order).nonrepeated_index()];
}

double& CumulantState::nonrepeated(int order) {
    return values[order - 1][order_basis(order).nonrepeated_index()];
}

CumulantState uniform_sphere_state(int n_star, long long N) {
    CumulantState s = CumulantState::zeros(n_star);
    for (int n = 1; n <= n_star; ++n) {
        const auto& basis = order_basis(n);
        for (size_t i = 0; i < basis.all.size(); ++i)
            s.values[n - 1][i] = to_double(uniform_sphere_cumulant(N, basis.all[i]));
    }
    return s;
}

CumulantState symmetrized_dirac_state(std::span<const double> base_velocities, int n_star) {
    auto energies = base_energies(base_velocities);
    CumulantState s = CumulantState::zeros(n_star);
    for (int n = 1; n <= n_star; ++n) {
        const auto& basis = order_basis(n);
        for (size_t i = 0; i < basis.all.size(); ++i)
            s.values[n - 1][i] = symmetrized_dirac_cumulant(energies, basis.all[i]);
    }
    if (std::abs(s.values[0][0] - 1.0) > 1e-9)
        throw domain_error("symmetrized_dirac_state: base vector off the sphere");
    s.values[0][0] = 1.0;  // exact for any sphere measure; drop the rounding
    return s;
}

// ---------------------------------------------------------------------------
// Scalar coefficients
// ---------------------------------------------------------------------------

double dissipation_coeff(int n, long long N) {
    if (n == 1) return 0.0;
    if (n < 1) throw domain_error("dissipation_coeff: order must be positive");
    if (n > N) throw domain_error("dissipation_coeff: order exceeds particle count");
    return n / 4.0 + (2.0 * n * n - n) / (4.0 * (N - 1));
}

double a_mn_coeff(int m, int n) {
    if (m < 1 || m > n - 1) throw domain_error("a_mn_coeff: m outside [1, n-1]");
    return to_double(Rational(2 * factorial(n - 2), factorial(m - 1) * factorial(n - m - 1)));
}

double nonrepeated_rhs(int n, std::span<const double> nr_values, long long N) {
    if (n == 1) return 0.0;
    if (n > static_cast<int>(nr_values.size()))
        throw incomplete_input_error("nonrepeated_rhs: missing lower-order values");
    if (n > N) throw domain_error("nonrepeated_rhs: order exceeds particle count");
    double nonlinear = 0.0;
    for (int m = 1; m <= n - 1; ++m)
        nonlinear += a_mn_coeff(m, n) * nr_values[m - 1] * nr_values[n - m - 1];
    nonlinear *= -static_cast<double>(n) * (n - 1) / (4.0 * (N - 1));
    return -dissipation_coeff(n, N) * nr_values[n - 1] + nonlinear;
}

std::vector<double> rescale_h(std::span<const double> nr_values, double alpha, long long N) {
    std::vector<double> h(nr_values.size());
    for (size_t i = 0; i < h.size(); ++i) {
        int n = static_cast<int>(i) + 1;
        double sign = (n % 2 == 1) ? 1.0 : -1.0;
        h[i] = sign * std::pow(static_cast<double>(N - 1), alpha * (n - 1)) /
               to_double(Rational(factorial(n - 1))) * nr_values[i];
    }
    return h;
}

std::vector<double> rescale_h_inverse(std::span<const double> h_values, double alpha,
                                      long long N) {
    std::vector<double> nr(h_values.size());
    for (size_t i = 0; i < nr.size(); ++i) {
        int n = static_cast<int>(i) + 1;
        double sign = (n % 2 == 1) ? 1.0 : -1.0;
        nr[i] = sign * to_double(Rational(factorial(n - 1))) *
                std::pow(static_cast<double>(N - 1), -alpha * (n - 1)) * h_values[i];
    }
    return nr;
}

std::vector<double> stationary_nonrepeated(int n_max, long long N) {
    if (n_max < 1) throw domain_error("stationary_nonrepeated: n_max must be positive");
    if (n_max > N) throw domain_error("stationary_nonrepeated: n_max exceeds particle count");
    std::vector<double> h(n_max);
    h[0] = 1.0;
    for (int n = 2; n <= n_max; ++n) {
        double sum = 0.0;
        for (int m = 1; m <= n - 1; ++m) sum += h[m - 1] * h[n - m - 1];
        h[n - 1] = n / (2.0 * dissipation_coeff(n, N)) * sum;
    }
    return h;
}

Rational catalan_majorant(int n) {
    if (n < 1) throw domain_error("catalan_majorant: n must be positive");
    return pow2(n) * Rational(factorial(2 * n), 4 * (2 * n - 1)) /
           Rational(factorial(n) * factorial(n));
}

// ---------------------------------------------------------------------------
// Mechanical expansion of the break / fuse / exchange terms.
//
// Every expectation <:e_w: e_i^{ai} e_j^{aj}> arising from the angle-averaged
// collision polynomial powers is expanded by the truncated
// moments-to-cumulants formula over the n ground positions.  Single-block
// partitions feed the linear operator, everything else becomes a product of
// lower-order cumulants.  No hand-derived case tables.
// ---------------------------------------------------------------------------

namespace detail {

namespace {

enum class Channel { Break, Fuse, Ex };

using FactorList = std::vector<std::pair<int, Classifier>>;

const PowerExpansion& cached_p_power(int m) {
    static std::map<int, PowerExpansion> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, p_power_expansion(m)).first;
    return it->second;
}

void accumulate_expectation(std::map<FactorList, Rational>& acc, const Rational& weight,
                            const std::vector<int>& wick_colors, int color_i, int ai, int color_j,
                            int aj, int row_len, Channel ch) {
    std::vector<int> colors = wick_colors;
    colors.insert(colors.end(), ai, color_i);
    colors.insert(colors.end(), aj, color_j);
    const int n = static_cast<int>(colors.size());
    const int wick_count = static_cast<int>(wick_colors.size());

    for_each_set_partition(n, [&](std::span<const int> rgs) {
        const int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        // a block disjoint from the plain part is Wick-internal and kills the term
        for (int b = 0; b < nblocks; ++b) {
            bool meets_plain = false;
            for (int i = wick_count; i < n && !meets_plain; ++i)
                if (rgs[i] == b) meets_plain = true;
            if (!meets_plain) return;
        }
        FactorList factors;
        factors.reserve(nblocks);
        long total_len = 0;
        for (int b = 0; b < nblocks; ++b) {
            LabelSequence labels;
            for (int i = 0; i < n; ++i)
                if (rgs[i] == b) labels.push_back(colors[i]);
            Classifier c = Classifier::of_labels(labels);
            total_len += c.length();
            factors.emplace_back(c.order(), std::move(c));
        }
        std::sort(factors.begin(), factors.end());

        if (nblocks >= 2) {
            // every nonlinear product must lose at least this much classifier length
            int deficit_floor = (ch == Channel::Break) ? row_len - 1 : row_len - 2;
            if (total_len - nblocks < deficit_floor)
                throw error("hierarchy assembly: nonlinear term violates length-deficit bound");
            std::vector<int> ground(n), plain;
            std::map<int, int> coloring;
            for (int i = 0; i < n; ++i) {
                ground[i] = i;
                coloring[i] = colors[i];
                if (i >= wick_count) plain.push_back(i);
            }
            SetPartition pi;
            pi.blocks.resize(nblocks);
            for (int i = 0; i < n; ++i) pi.blocks[rgs[i]].push_back(i);
            if (!coloring_bound_holds(ground, coloring, plain, pi))
                throw error("hierarchy assembly: nonlinear term violates coloring bound");
        }
        acc[factors] += weight;
    });
}

std::vector<SymbolicTerm> freeze(std::map<FactorList, Rational>&& acc) {
    std::vector<SymbolicTerm> out;
    out.reserve(acc.size());
    for (auto& [factors, coeff] : acc)
        if (coeff != 0) out.push_back(SymbolicTerm{coeff, factors});
    return out;
}

SymbolicRow expand_row(const Classifier& s) {
    SymbolicRow row;
    row.s = s;
    row.len = s.length();
    const int L = s.length();
    std::map<FactorList, Rational> brk, fuse, ex;

    auto wick_of = [&](int i, int removed) {
        std::vector<int> colors;
        for (int k = 0; k < L; ++k) {
            int count = s.part(k) - (k == i ? removed : 0);
            colors.insert(colors.end(), count, k);
        }
        return colors;
    };
    auto wick_of2 = [&](int i, int ri, int j, int rj) {
        std::vector<int> colors;
        for (int k = 0; k < L; ++k) {
            int count = s.part(k) - (k == i ? ri : 0) - (k == j ? rj : 0);
            colors.insert(colors.end(), count, k);
        }
        return colors;
    };

    for (int i = 0; i < L; ++i) {
        for (int l = 1; l <= s.part(i); ++l) {
            Rational bin = Rational(binomial(s.part(i), l));
            const auto& p = cached_p_power(l);
            auto wick = wick_of(i, l);
            for (int a = 0; a <= l; ++a) {  // a = exponent carried by particle j
                Rational w = bin * p.coeff[l - a];
                if (w == 0) continue;
                // break: j is one of the N-L fresh particles (color L)
                accumulate_expectation(brk, w, wick, i, l - a, L, a, L, Channel::Break);
                // fuse: j runs over the other occupied slots
                for (int j = 0; j < L; ++j)
                    if (j != i)
                        accumulate_expectation(fuse, w, wick, i, l - a, j, a, L, Channel::Fuse);
            }
        }
    }

    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            if (j == i) continue;
            for (int l = 1; l <= s.part(i); ++l) {
                for (int lp = 1; lp <= s.part(j); ++lp) {
                    Rational bin = Rational(binomial(s.part(i), l) * binomial(s.part(j), lp));
                    if (lp % 2) bin = -bin;  // Q^{l'} = (-P)^{l'}
                    const int m = l + lp;
                    const auto& p = cached_p_power(m);
                    auto wick = wick_of2(i, l, j, lp);
                    for (int a = 0; a <= m; ++a) {
                        Rational w = bin * p.coeff[m - a];
                        if (w == 0) continue;
                        accumulate_expectation(ex, w, wick, i, m - a, j, a, L, Channel::Ex);
                    }
                }
            }
        }
    }

    row.brk = freeze(std::move(brk));
    row.fuse = freeze(std::move(fuse));
    row.ex = freeze(std::move(ex));
    return row;
}

} // namespace

const SymbolicOrder& symbolic_order(int n) {
    static std::map<int, std::unique_ptr<SymbolicOrder>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto so = std::make_unique<SymbolicOrder>();
        so->n = n;
        const auto& basis = order_basis(n);
        so->rows.reserve(basis.all.size());
        for (const auto& s : basis.all) so->rows.push_back(expand_row(s));
        it = cache.emplace(n, std::move(so)).first;
    }
    return *it->second;
}

double evaluate_row_rhs(int n, int row_index, const CumulantState& state, long long N) {
    const auto& row = symbolic_order(n).rows[row_index];
    const int L = row.len;
    auto factor_value = [&state](const std::pair<int, Classifier>& f) {
        return state.value(f.first, f.second);
    };
    auto eval = [&](const std::vector<SymbolicTerm>& terms, const Rational& prefactor) {
        double total = 0.0;
        double pf = to_double(prefactor);
        for (const auto& t : terms) {
            double prod = to_double(t.coeff);
            for (const auto& f : t.factors) prod *= factor_value(f);
            total += pf * prod;
        }
        return total;
    };
    return eval(row.brk, Rational(2 * (N - L), N - 1)) + eval(row.fuse, Rational(2, N - 1)) +
           eval(row.ex, Rational(1, N - 1));
}

const HierarchyOperator& cached_operator(int n, long long N) {
    static std::map<std::pair<int, long long>, std::unique_ptr<HierarchyOperator>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, N);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<HierarchyOperator>(build_linear_operator(n, N)))
                 .first;
    return *it->second;
}

} // namespace detail

HierarchyOperator build_linear_operator(int n, long long N) {
    if (n < 2) throw domain_error("build_linear_operator: order must be at least 2");
    if (N < n) throw domain_error("build_linear_operator: N must be at least the order");
    const auto& basis = order_basis(n);
    const auto& sym = detail::symbolic_order(n);
    const int dim = basis.repeated_count();
    const int nr_index = basis.nonrepeated_index();

    HierarchyOperator op;
    op.order = n;
    op.N = N;
    op.repeated.assign(basis.all.begin(), basis.all.begin() + dim);
    op.m_main = Eigen::MatrixXd::Zero(dim, dim);
    op.r_pert = Eigen::MatrixXd::Zero(dim, dim);
    op.nonlinear.resize(dim);

    Classifier coupled_row = [&] {  // (2,1,...,1)
        std::vector<int> parts{2};
        parts.insert(parts.end(), n - 2, 1);
        return Classifier(parts);
    }();
    op.source_row = basis.index_of(coupled_row);
    Rational source_total = 0;

    for (int row = 0; row < dim; ++row) {
        const auto& sr = sym.rows[row];
        const int L = sr.len;
        const Rational pre_brk_full(2 * (N - L), N - 1);
        const Rational pre_fuse(2, N - 1);
        const Rational pre_ex(1, N - 1);
        std::map<std::vector<std::pair<int, int>>, double> nl;

        auto handle = [&](const std::vector<detail::SymbolicTerm>& terms, const Rational& prefactor,
                          bool is_break) {
            for (const auto& t : terms) {
                if (t.factors.size() == 1) {
                    const Classifier& target = t.factors[0].second;
                    if (target.order() != n)
                        throw error("hierarchy assembly: linear target of wrong order");
                    int col = basis.index_of(target);
                    if (col == nr_index) {
                        if (!is_break || row != op.source_row)
                            throw error(
                                "hierarchy assembly: non-repeated coupling outside break row");
                        source_total += prefactor * t.coeff;
                    } else if (is_break) {
                        // split 2(N-L)/(N-1) = 2 - 2(L-1)/(N-1) into M_n + R_{n,N}
                        op.m_main(row, col) += to_double(2 * t.coeff);
                        op.r_pert(row, col) += to_double(-Rational(2 * (L - 1), N - 1) * t.coeff);
                    } else {
                        op.r_pert(row, col) += to_double(prefactor * t.coeff);
                    }
                } else {
                    std::vector<std::pair<int, int>> factors;
                    factors.reserve(t.factors.size());
                    for (const auto& f : t.factors) {
                        if (f.first >= n)
                            throw error("hierarchy assembly: nonlinear factor not lower order");
                        factors.emplace_back(f.first, order_basis(f.first).index_of(f.second));
                    }
                    nl[factors] += to_double(prefactor * t.coeff);
                }
            }
        };
        handle(sr.brk, pre_brk_full, true);
        handle(sr.fuse, pre_fuse, false);
        handle(sr.ex, pre_ex, false);

        for (auto& [factors, coeff] : nl)
            if (coeff != 0.0) op.nonlinear[row].push_back({coeff, factors});
    }

    if (source_total != beta_coeff(n, N))
        throw error("hierarchy assembly: source coefficient disagrees with beta_{n,N}");
    op.source_coeff = to_double(source_total);
    return op;
}

std::vector<double> nonlinear_term(int n, const CumulantState& state, long long N) {
    if (state.max_order() < n - 1)
        throw incomplete_input_error("nonlinear_term: state misses lower orders");
    const auto& op = detail::cached_operator(n, N);
    std::vector<double> out(op.repeated.size(), 0.0);
    for (size_t row = 0; row < out.size(); ++row) {
        double total = 0.0;
        for (const auto& term : op.nonlinear[row]) {
            double prod = term.coeff;
            for (auto [order, idx] : term.factors) prod *= state.at(order, idx);
            total += prod;
        }
        out[row] = total;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time integration
// ---------------------------------------------------------------------------

namespace {

void hierarchy_derivative(const CumulantState& y, const HierarchyParams& p, CumulantState& dy) {
    const int n_star = y.max_order();
    dy.values[0][0] = 0.0;  // conserved mean energy
    std::vector<double> nr(n_star);
    for (int m = 1; m <= n_star; ++m) nr[m - 1] = y.nonrepeated(m);

    for (int n = 2; n <= n_star; ++n) {
        const auto& op = detail::cached_operator(n, p.N);
        const int dim = static_cast<int>(op.repeated.size());
        Eigen::Map<const Eigen::VectorXd> x(y.values[n - 1].data(), dim);
        Eigen::VectorXd lin = op.m_main * x + op.r_pert * x;
        std::vector<double> nl = nonlinear_term(n, y, p.N);
        for (int row = 0; row < dim; ++row) dy.values[n - 1][row] = lin(row) + nl[row];
        dy.values[n - 1][op.source_row] += op.source_coeff * y.nonrepeated(n);
        dy.nonrepeated(n) = nonrepeated_rhs(n, nr, p.N);
    }
}

void add_scaled(CumulantState& y, const CumulantState& k, double c) {
    for (size_t o = 0; o < y.values.size(); ++o)
        for (size_t i = 0; i < y.values[o].size(); ++i) y.values[o][i] += c * k.values[o][i];
}

} // namespace

Trajectory integrate_hierarchy(const CumulantState& initial, const HierarchyParams& params,
                               double t_end, double dt, double sample_dt) {
    params.validate();
    if (dt <= 0.0) throw domain_error("integrate_hierarchy: dt must be positive");
    if (t_end < 0.0) throw domain_error("integrate_hierarchy: t_end must be nonnegative");
    if (initial.max_order() != params.n_star)
        throw domain_error("integrate_hierarchy: state order does not match n_star");
    if (std::abs(initial.at(1, 0) - 1.0) > 1e-12)
        throw domain_error("integrate_hierarchy: order-1 cumulant must equal 1");

    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    const long stride = std::max<long>(1, std::lround(sample_dt / dt));

    Trajectory traj;
    traj.dt = dt;
    CumulantState y = initial;
    y.time = 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(y);

    CumulantState k1 = CumulantState::zeros(params.n_star);
    CumulantState k2 = k1, k3 = k1, k4 = k1, tmp = k1;
    double max_abs = 1.0;

    for (long step = 0; step < steps; ++step) {
        double h = std::min(dt, t_end - step * dt);
        hierarchy_derivative(y, params, k1);
        tmp = y;
        add_scaled(tmp, k1, h / 2.0);
        hierarchy_derivative(tmp, params, k2);
        tmp = y;
        add_scaled(tmp, k2, h / 2.0);
        hierarchy_derivative(tmp, params, k3);
        tmp = y;
        add_scaled(tmp, k3, h);
        hierarchy_derivative(tmp, params, k4);

        add_scaled(y, k1, h / 6.0);
        add_scaled(y, k2, h / 3.0);
        add_scaled(y, k3, h / 3.0);
        add_scaled(y, k4, h / 6.0);
        y.time = (step + 1 < steps) ? (step + 1) * dt : t_end;

        for (const auto& order_values : y.values)
            for (double v : order_values) {
                if (!std::isfinite(v))
                    throw divergence_error("integrate_hierarchy: non-finite value at t = " +
                                           std::to_string(y.time));
                max_abs = std::max(max_abs, std::abs(v));
            }

        if ((step + 1) % stride == 0 || step + 1 == steps) {
            traj.times.push_back(y.time);
            traj.states.push_back(y);
        }
    }
    traj.tolerance = std::max(1e-12, std::pow(dt, 4) * std::max(t_end, 1.0)) * max_abs;
    return traj;
}

// ---------------------------------------------------------------------------
// Stationary solutions
// ---------------------------------------------------------------------------

std::vector<double> stationary_repeated(int n, long long N, const CumulantState& lower) {
    const auto& op = detail::cached_operator(n, N);
    const int dim = static_cast<int>(op.repeated.size());

    std::vector<double> h = stationary_nonrepeated(n, N);
    std::vector<double> nr = rescale_h_inverse(h, 1.0, N);

    std::vector<double> nl = nonlinear_term(n, lower, N);
    Eigen::VectorXd rhs(dim);
    for (int row = 0; row < dim; ++row) rhs(row) = -nl[row];
    rhs(op.source_row) -= op.source_coeff * nr[n - 1];

    Eigen::MatrixXd m = op.m_main + op.r_pert;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    double max_row_norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    lu.setThreshold(1e-12 * std::max(1.0, max_row_norm));
    if (!lu.isInvertible()) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        double cond = svd.singularValues()(0) / svd.singularValues()(dim - 1);
        throw solver_error("stationary_repeated: singular operator at order " + std::to_string(n) +
                           " (condition estimate " + std::to_string(cond) + ")");
    }
    Eigen::VectorXd x = lu.solve(rhs);
    return {x.data(), x.data() + dim};
}

CumulantState stationary_state(int n_star, long long N) {
    CumulantState s = CumulantState::zeros(n_star);
    s.values[0][0] = 1.0;
    std::vector<double> h = stationary_nonrepeated(n_star, N);
    std::vector<double> nr = rescale_h_inverse(h, 1.0, N);
    for (int n = 2; n <= n_star; ++n) {
        std::vector<double> rep = stationary_repeated(n, N, s);
        for (size_t i = 0; i < rep.size(); ++i) s.values[n - 1][i] = rep[i];
        s.nonrepeated(n) = nr[n - 1];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Norms and diagnostics
// ---------------------------------------------------------------------------

AlphaNormReport alpha_norm(std::span<const double> repeated_values, double alpha, int n,
                           long long N) {
    const auto& basis = order_basis(n);
    if (static_cast<int>(repeated_values.size()) != basis.repeated_count())
        throw incomplete_input_error("alpha_norm: values incomplete over C'_n");
    AlphaNormReport report;
    report.order = n;
    for (int i = 0; i < basis.repeated_count(); ++i) {
        const Classifier& r = basis.all[i];
        double w = std::abs(repeated_values[i]) *
                   std::pow(static_cast<double>(N - 1), alpha * (r.length() - 1));
        report.weighted.emplace_back(r, w);
        report.norm = std::max(report.norm, w);
    }
    return report;
}

std::vector<double> semigroup_norm_curve(const Eigen::MatrixXd& m,
                                         const std::vector<Classifier>& repeated, double alpha,
                                         long long N, std::span<const double> t_grid) {
    const int dim = static_cast<int>(repeated.size());
    if (m.rows() != dim || m.cols() != dim)
        throw domain_error("semigroup_norm_curve: matrix/basis size mismatch");
    Eigen::VectorXd weight(dim);
    for (int i = 0; i < dim; ++i)
        weight(i) = std::pow(static_cast<double>(N - 1), alpha * (repeated[i].length() - 1));
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        Eigen::MatrixXd e = (t * m).exp();
        double norm = 0.0;
        for (int r = 0; r < dim; ++r) {
            double row_sum = 0.0;
            for (int c = 0; c < dim; ++c) row_sum += std::abs(e(r, c)) * weight(r) / weight(c);
            norm = std::max(norm, row_sum);
        }
        out.push_back(norm);
    }
    return out;
}

long long semigroup_threshold_n0(int n_star, double alpha) {
    if (n_star < 2) throw domain_error("semigroup_threshold_n0: n_star must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("semigroup_threshold_n0: alpha outside (0,1)");
    double n0 = std::pow(80.0 * n_star * std::pow(5.0, n_star) / 9.0, 1.0 / alpha);
    return static_cast<long long>(std::ceil(n0));
}

double decay_rate_fit(std::span<const double> times, std::span<const double> values, double floor,
                      double tolerance) {
    if (times.size() != values.size()) throw domain_error("decay_rate_fit: size mismatch");
    if (times.size() < 10) throw insufficient_signal_error("decay_rate_fit: fewer than 10 samples");
    const double threshold = 10.0 * tolerance;
    int last = -1;
    for (int i = static_cast<int>(values.size()) - 1; i >= 0; --i)
        if (std::abs(values[i] - floor) > threshold) { last = i; break; }
    if (last < 0)
        throw insufficient_signal_error("decay_rate_fit: series never above the noise floor");
    int first = last;
    while (first > 0 && std::abs(values[first - 1] - floor) > threshold) --first;
    const int count = last - first + 1;
    if (count < 2) throw insufficient_signal_error("decay_rate_fit: signal window too short");

    double st = 0, sy = 0, stt = 0, sty = 0;
    for (int i = first; i <= last; ++i) {
        double yi = std::log(std::abs(values[i] - floor));
        st += times[i];
        sy += yi;
        stt += times[i] * times[i];
        sty += times[i] * yi;
    }
    double denom = count * stt - st * st;
    if (denom <= 0.0) throw insufficient_signal_error("decay_rate_fit: degenerate time grid");
    double slope = (count * sty - st * sy) / denom;
    return -slope;
}

} // namespace kac
