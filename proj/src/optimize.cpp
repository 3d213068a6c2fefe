#include "gollgr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gollgr::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Counted {
    const Objective& f;
    int evals = 0;

    double operator()(const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : kInf;
    }
};

struct Simplex {
    std::vector<std::vector<double>> pts;
    std::vector<double> vals;

    void sort() {
        std::vector<std::size_t> idx(vals.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<double>> p2;
        std::vector<double> v2;
        for (auto i : idx) {
            p2.push_back(std::move(pts[i]));
            v2.push_back(vals[i]);
        }
        pts = std::move(p2);
        vals = std::move(v2);
    }

    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            for (std::size_t j = 0; j < pts[0].size(); ++j) d = std::max(d, std::fabs(pts[i][j] - pts[0][j]));
        }
        return d;
    }

    double spread() const { return vals.back() - vals.front(); }
};

Simplex make_simplex(Counted& f, const std::vector<double>& x0, double step) {
    Simplex s;
    s.pts.push_back(x0);
    for (std::size_t j = 0; j < x0.size(); ++j) {
        auto v = x0;
        v[j] += step;
        s.pts.push_back(std::move(v));
    }
    for (const auto& p : s.pts) s.vals.push_back(f(p));
    s.sort();
    return s;
}

std::vector<double> affine(const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) out[j] = c[j] + t * (w[j] - c[j]);
    return out;
}

// Runs until the tolerances are met or the budget is exhausted.
bool run(Counted& f, Simplex& s, const NelderMeadOptions& opt, int& iterations) {
    const std::size_t n = s.pts[0].size();
    while (true) {
        const double diam = s.diameter();
        if (diam < opt.diameter_tol && s.spread() < opt.spread_tol) return true;
        if (f.evals >= opt.max_evals) return false;
        // Collapsed below the spacing of doubles: no further progress possible.
        double scale = 1.0;
        for (double v : s.pts[0]) scale = std::max(scale, std::fabs(v));
        if (diam < 8.0 * std::numeric_limits<double>::epsilon() * scale) return false;
        ++iterations;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += s.pts[i][j] / static_cast<double>(n);
        }
        auto& worst = s.pts[n];
        const auto xr = affine(centroid, worst, -1.0);
        const double fr = f(xr);
        if (fr < s.vals[0]) {
            const auto xe = affine(centroid, worst, -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s.pts[n] = xe;
                s.vals[n] = fe;
            } else {
                s.pts[n] = xr;
                s.vals[n] = fr;
            }
        } else if (fr < s.vals[n - 1]) {
            s.pts[n] = xr;
            s.vals[n] = fr;
        } else {
            const bool outside = fr < s.vals[n];
            const auto xc = outside ? affine(centroid, worst, -0.5) : affine(centroid, worst, 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, s.vals[n])) {
                s.pts[n] = xc;
                s.vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    s.pts[i] = affine(s.pts[0], s.pts[i], 0.5);
                    s.vals[i] = f(s.pts[i]);
                }
            }
        }
        s.sort();
    }
}

}  // namespace

void NelderMeadOptions::validate() const {
    if (!(diameter_tol > 0.0) || !(spread_tol > 0.0)) throw std::invalid_argument("NelderMeadOptions: tolerances must be positive");
    if (max_evals < 1) throw std::invalid_argument("NelderMeadOptions: max_evals must be positive");
    if (!(initial_step > 0.0)) throw std::invalid_argument("NelderMeadOptions: initial_step must be positive");
    if (max_restarts < 0) throw std::invalid_argument("NelderMeadOptions: max_restarts must be nonnegative");
}

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt) {
    opt.validate();
    if (x0.empty()) throw std::invalid_argument("nelder_mead: empty starting point");
    Counted cf{f};
    NelderMeadResult res;
    Simplex s = make_simplex(cf, x0, opt.initial_step);
    bool ok = run(cf, s, opt, res.iterations);
    double step = opt.initial_step;
    while (ok && res.restarts < opt.max_restarts) {
        const double before = s.vals[0];
        step = std::max(step * 0.1, 100.0 * opt.diameter_tol);
        ++res.restarts;
        Simplex fresh = make_simplex(cf, s.pts[0], step);
        ok = run(cf, fresh, opt, res.iterations);
        s = std::move(fresh);
        if (before - s.vals[0] <= opt.spread_tol) break;
    }
    res.x = s.pts[0];
    res.value = s.vals[0];
    res.evaluations = cf.evals;
    res.diameter = s.diameter();
    res.spread = s.spread();
    res.converged = ok && std::isfinite(res.value);
    return res;
}

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double rel_step) {
    std::vector<double> g(x.size());
    auto xp = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double h = rel_step * (1.0 + std::fabs(x[j]));
        xp[j] = x[j] + h;
        const double fp = f(xp);
        xp[j] = x[j] - h;
        const double fm = f(xp);
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::vector<double> fd_hessian(const Objective& f, const std::vector<double>& x, double rel_step) {
    const std::size_t n = x.size();
    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = rel_step * (1.0 + std::fabs(x[j]));
    std::vector<double> H(n * n);
    const double f0 = f(x);
    auto xp = x;
    for (std::size_t i = 0; i < n; ++i) {
        xp[i] = x[i] + h[i];
        const double fp = f(xp);
        xp[i] = x[i] - h[i];
        const double fm = f(xp);
        xp[i] = x[i];
        H[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            double acc = 0.0;
            for (int si : {1, -1}) {
                for (int sj : {1, -1}) {
                    xp[i] = x[i] + si * h[i];
                    xp[j] = x[j] + sj * h[j];
                    acc += si * sj * f(xp);
                }
            }
            xp[i] = x[i];
            xp[j] = x[j];
            H[i * n + j] = H[j * n + i] = acc / (4.0 * h[i] * h[j]);
        }
    }
    return H;
}

}  // namespace gollgr::optim
