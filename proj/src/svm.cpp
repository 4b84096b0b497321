#include "har/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>

#include "har/error.hpp"
#include "har/preprocess.hpp"

namespace har {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Columns of Q_ij = y_i y_j K(x_i, x_j), LRU-cached.
class QColumns {
public:
    QColumns(const Matrix& x, std::span<const int> y, double gamma, double cache_mb)
        : x_(x), y_(y), gamma_(gamma), l_(x.rows()), slots_(l_, kNone) {
        sqnorm_.resize(l_);
        for (std::size_t i = 0; i < l_; ++i) sqnorm_[i] = dot(x.row(i), x.row(i));
        const double bytes = cache_mb * 1024.0 * 1024.0;
        capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(bytes / (8.0 * static_cast<double>(l_))));
        capacity_ = std::min(capacity_, l_);
    }

    const double* column(std::size_t i) {
        if (slots_[i] != kNone) {
            lru_.splice(lru_.begin(), lru_, where_[slots_[i]]);
            return store_[slots_[i]].data();
        }
        std::size_t slot;
        if (store_.size() < capacity_) {
            slot = store_.size();
            store_.emplace_back(l_);
            where_.push_back(lru_.end());
            owner_.push_back(i);
        } else {
            slot = lru_.back();
            lru_.pop_back();
            slots_[owner_[slot]] = kNone;
            owner_[slot] = i;
        }
        lru_.push_front(slot);
        where_[slot] = lru_.begin();
        slots_[i] = slot;

        auto& col = store_[slot];
        auto xi = x_.row(i);
        for (std::size_t t = 0; t < l_; ++t) {
            const double d2 = std::max(0.0, sqnorm_[i] + sqnorm_[t] - 2.0 * dot(xi, x_.row(t)));
            col[t] = static_cast<double>(y_[i] * y_[t]) * std::exp(-gamma_ * d2);
        }
        col[i] = 1.0;
        return col.data();
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    const Matrix& x_;
    std::span<const int> y_;
    double gamma_;
    std::size_t l_;
    std::size_t capacity_ = 2;
    std::vector<double> sqnorm_;
    std::vector<std::vector<double>> store_;
    std::vector<std::size_t> slots_;
    std::vector<std::size_t> owner_;
    std::list<std::size_t> lru_;
    std::vector<std::list<std::size_t>::iterator> where_;
};

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
#pragma omp simd reduction(+ : d2)
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

BinarySvmSolution solve_binary_svm(const Matrix& x, std::span<const int> y, double c, double gamma,
                                   double tolerance, double cache_mb) {
    const std::size_t l = x.rows();
    if (l != y.size() || l < 2) throw DataError("svm: row/label count mismatch");
    QColumns q(x, y, gamma, cache_mb);

    BinarySvmSolution sol;
    auto& alpha = sol.alpha;
    alpha.assign(l, 0.0);
    std::vector<double> grad(l, -1.0);
    const double qd = 1.0;  // K(x, x) = 1 for the RBF kernel
    const long max_iter = std::max<long>(10000000L, 100L * static_cast<long>(l));

    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    while (sol.iterations < max_iter) {
        // Working set: i maximizes -y G over I_up, j minimizes the second-order objective.
        double gmax = -kInf, gmax2 = -kInf;
        std::ptrdiff_t gi = -1, gj = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1) {
                if (!upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    gi = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                gi = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (gi < 0) break;
        const auto i = static_cast<std::size_t>(gi);
        const double* qi = q.column(i);
        double obj_min = kInf;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1) {
                if (lower(t)) continue;
                const double grad_diff = gmax + grad[t];
                if (grad[t] >= gmax2) gmax2 = grad[t];
                if (grad_diff > 0.0) {
                    const double quad = qd + qd - 2.0 * y[i] * qi[t];
                    const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                    if (obj <= obj_min) {
                        gj = static_cast<std::ptrdiff_t>(t);
                        obj_min = obj;
                    }
                }
            } else {
                if (upper(t)) continue;
                const double grad_diff = gmax - grad[t];
                if (-grad[t] >= gmax2) gmax2 = -grad[t];
                if (grad_diff > 0.0) {
                    const double quad = qd + qd + 2.0 * y[i] * qi[t];
                    const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                    if (obj <= obj_min) {
                        gj = static_cast<std::ptrdiff_t>(t);
                        obj_min = obj;
                    }
                }
            }
        }
        if (gmax + gmax2 < tolerance || gj < 0) break;
        const auto j = static_cast<std::size_t>(gj);
        ++sol.iterations;

        qi = q.column(i);
        const double* qj = q.column(j);
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = qd + qd + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = qd + qd - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double da_i = alpha[i] - old_ai, da_j = alpha[j] - old_aj;
        for (std::size_t t = 0; t < l; ++t) grad[t] += qi[t] * da_i + qj[t] * da_j;
    }

    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    // G_t = sum_i Q_ti alpha_i - 1, so sum_i alpha_i y_i K_it = y_t (G_t + 1).
    sol.train_decision.resize(l);
    for (std::size_t t = 0; t < l; ++t) sol.train_decision[t] = y[t] * (grad[t] + 1.0) - sol.rho;
    return sol;
}

double PlattSigmoid::operator()(double f) const {
    const double z = f * a + b;
    return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattSigmoid PlattSigmoid::fit(std::span<const double> dec, std::span<const int> y) {
    const std::size_t l = dec.size();
    double prior1 = 0.0, prior0 = 0.0;
    for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
    const int max_iter = 100;
    const double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(l);
    for (std::size_t i = 0; i < l; ++i) t[i] = y[i] > 0 ? hi : lo;

    PlattSigmoid s{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            const double z = dec[i] * a + b;
            f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };
    double fval = objective(s.a, s.b);
    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            const double z = dec[i] * s.a + s.b;
            double p, q;
            if (z >= 0.0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = s.a + step * da, nb = s.b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 0.0001 * step * gd) {
                s = {na, nb};
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return s;
}

std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r) {
    const std::size_t k = r.size();
    std::vector<double> p(k, 1.0 / static_cast<double>(k)), qp(k);
    std::vector<std::vector<double>> qm(k, std::vector<double>(k, 0.0));
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j == t) continue;
            qm[t][t] += r[j][t] * r[j][t];
            qm[t][j] = -r[j][t] * r[t][j];
        }
    }
    const std::size_t max_iter = std::max<std::size_t>(100, k);
    const double eps = 0.005 / static_cast<double>(k);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double pqp = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            qp[t] = 0.0;
            for (std::size_t j = 0; j < k; ++j) qp[t] += qm[t][j] * p[j];
            pqp += p[t] * qp[t];
        }
        double max_err = 0.0;
        for (std::size_t t = 0; t < k; ++t) max_err = std::max(max_err, std::abs(qp[t] - pqp));
        if (max_err < eps) break;
        for (std::size_t t = 0; t < k; ++t) {
            const double diff = (-qp[t] + pqp) / qm[t][t];
            p[t] += diff;
            pqp = (pqp + diff * (diff * qm[t][t] + 2.0 * qp[t])) / (1.0 + diff) / (1.0 + diff);
            for (std::size_t j = 0; j < k; ++j) {
                qp[j] = (qp[j] + diff * qm[t][j]) / (1.0 + diff);
                p[j] /= (1.0 + diff);
            }
        }
    }
    double s = 0.0;
    for (double& v : p) {
        v = std::max(v, 0.0);
        s += v;
    }
    for (double& v : p) v /= s;
    return p;
}

double scale_gamma(const Matrix& x) {
    const auto data = x.data();
    const double n = static_cast<double>(data.size());
    double mean = 0.0;
    for (double v : data) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : data) var += (v - mean) * (v - mean);
    var /= n;
    return var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
}

SvmModel train_svm(const Matrix& x, std::span<const int> labels, const SvmSpec& spec, Execution exec) {
    if (x.rows() != labels.size() || x.rows() == 0) throw DataError("svm: row/label count mismatch");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw DataError("svm: non-finite value in training matrix");
    }
    if (!(spec.c > 0.0) || spec.gamma < 0.0) throw UsageError("svm: C must be > 0 and gamma >= 0");
    auto enc = LabelEncoding::fit(labels);
    if (enc.classes.size() < 2) throw DataError("svm needs at least two classes");
    const std::size_t k = enc.classes.size();

    SvmModel model;
    model.classes = enc.classes;
    model.c = spec.c;
    model.probability = spec.probability;
    model.gamma = spec.gamma > 0.0 ? spec.gamma : scale_gamma(x);

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < x.rows(); ++i) members[static_cast<std::size_t>(enc.encoded[i])].push_back(i);

    struct PairWork {
        std::size_t pos, neg;
        std::vector<std::size_t> rows;
        BinarySvmSolution sol;
        PlattSigmoid platt;
    };
    std::vector<PairWork> work;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            PairWork w{a, b, {}, {}, {}};
            w.rows = members[a];
            w.rows.insert(w.rows.end(), members[b].begin(), members[b].end());
            work.push_back(std::move(w));
        }
    }

    auto solve_pair = [&](PairWork& w) {
        Matrix sub = x.select_rows(w.rows);
        std::vector<int> y(w.rows.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = i < members[w.pos].size() ? 1 : -1;
        w.sol = solve_binary_svm(sub, y, spec.c, model.gamma, spec.tolerance, spec.cache_mb);
        if (spec.probability == SvmProbability::Platt) w.platt = PlattSigmoid::fit(w.sol.train_decision, y);
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(work.size()); ++p) solve_pair(work[static_cast<std::size_t>(p)]);
    } else {
        for (auto& w : work) solve_pair(w);
    }

    // Shared support-vector table in training-row order.
    std::vector<std::ptrdiff_t> sv_slot(x.rows(), -1);
    for (const auto& w : work) {
        for (std::size_t i = 0; i < w.rows.size(); ++i) {
            if (w.sol.alpha[i] > 0.0) sv_slot[w.rows[i]] = 0;
        }
    }
    std::vector<std::size_t> sv_rows;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (sv_slot[r] >= 0) {
            sv_slot[r] = static_cast<std::ptrdiff_t>(sv_rows.size());
            sv_rows.push_back(r);
        }
    }
    model.support_vectors = x.select_rows(sv_rows);

    for (const auto& w : work) {
        SvmModel::Pair pair;
        pair.pos = w.pos;
        pair.neg = w.neg;
        pair.rho = w.sol.rho;
        pair.platt = w.platt;
        pair.alpha_min = kInf;
        pair.alpha_max = -kInf;
        for (std::size_t i = 0; i < w.rows.size(); ++i) {
            const double a = w.sol.alpha[i];
            const double yi = i < members[w.pos].size() ? 1.0 : -1.0;
            pair.alpha_min = std::min(pair.alpha_min, a);
            pair.alpha_max = std::max(pair.alpha_max, a);
            pair.alpha_y_sum += a * yi;
            if (a > 0.0) {
                pair.sv.push_back(static_cast<std::size_t>(sv_slot[w.rows[i]]));
                pair.coef.push_back(a * yi);
            }
        }
        model.pairs.push_back(std::move(pair));
    }
    return model;
}

std::vector<double> SvmModel::decision_values(std::span<const double> row) const {
    if (row.size() != support_vectors.cols()) throw DataError("svm: feature width mismatch");
    std::vector<double> kv(support_vectors.rows());
    for (std::size_t s = 0; s < kv.size(); ++s) kv[s] = rbf_kernel(support_vectors.row(s), row, gamma);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        double f = -p.rho;
        for (std::size_t i = 0; i < p.sv.size(); ++i) f += p.coef[i] * kv[p.sv[i]];
        out.push_back(f);
    }
    return out;
}

std::vector<double> SvmModel::predict_proba(std::span<const double> row) const {
    const auto dec = decision_values(row);
    const std::size_t k = classes.size();
    if (probability == SvmProbability::Votes) {
        std::vector<double> votes(k, 0.0);
        for (std::size_t p = 0; p < pairs.size(); ++p) votes[dec[p] > 0.0 ? pairs[p].pos : pairs[p].neg] += 1.0;
        for (double& v : votes) v /= static_cast<double>(pairs.size());
        return votes;
    }
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
    constexpr double min_prob = 1e-7;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double v = std::clamp(pairs[p].platt(dec[p]), min_prob, 1.0 - min_prob);
        r[pairs[p].pos][pairs[p].neg] = v;
        r[pairs[p].neg][pairs[p].pos] = 1.0 - v;
    }
    return couple_pairwise(r);
}

}  // namespace har
