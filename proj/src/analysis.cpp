// SPDX-License-Identifier: Apache-2.0
#include "eepn/analysis.hpp"

#include "eepn/errors.hpp"
#include "eepn/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace eepn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_pi(double a) { return std::remainder(a, kTwoPi); }

void check_aligned(const SymbolSequence& x, const SymbolSequence& y)
{
    detail::require(x.size() == y.size(), "reference and received sequences differ in length");
}

std::vector<double> ranks(std::span<const double> v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

double weighted_mean(std::span<const double> v, std::span<const double> w)
{
    double sw = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += w[i] * v[i];
        sw += w[i];
    }
    return s / sw;
}

} // namespace

BlockPartition BlockPartition::over(std::size_t begin, std::size_t end, std::size_t block_size)
{
    detail::require(end >= begin, "partition range is reversed");
    BlockPartition p;
    p.block_size = block_size;
    p.begin = begin;
    p.n_blocks = block_size == 0 ? 0 : (end - begin) / block_size;
    p.validate();
    return p;
}

void BlockPartition::validate() const
{
    detail::require(block_size >= 64, "block size must be >= 64 symbols");
}

double range_snr_db(std::span<const cplx> x, std::span<const cplx> y)
{
    detail::require(x.size() == y.size() && !x.empty(), "SNR ranges must be equal and non-empty");
    cplx yx{};
    double yy = 0.0;
    double xx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        yx += std::conj(y[i]) * x[i];
        yy += std::norm(y[i]);
        xx += std::norm(x[i]);
    }
    const cplx a = yy > 0.0 ? yx / yy : cplx{};
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        err += std::norm(x[i] - a * y[i]);
    }
    if (err <= xx * std::pow(10.0, -kSnrCapDb / 10.0)) {
        return kSnrCapDb;
    }
    return 10.0 * std::log10(xx / err);
}

std::vector<double> blockwise_snr(const SymbolSequence& x, const SymbolSequence& y, const BlockPartition& partition)
{
    check_aligned(x, y);
    partition.validate();
    detail::require(partition.end() <= x.size(), "partition extends past the sequence");
    std::vector<double> out(partition.n_blocks);
    for (std::size_t b = 0; b < partition.n_blocks; ++b) {
        const auto lo = partition.block_begin(b);
        out[b] = range_snr_db(std::span(x.symbols).subspan(lo, partition.block_size),
                              std::span(y.symbols).subspan(lo, partition.block_size));
    }
    return out;
}

void CpsdConfig::validate() const
{
    detail::require(segment >= 8, "CPSD segment must be >= 8 symbols");
    detail::require(hop >= 1 && hop <= segment, "CPSD hop must lie in [1, segment]");
    detail::require(rolloff >= 0.0, "rolloff must be >= 0");
}

double FrequencyPhaseProfile::phase_at(double f_hz) const
{
    detail::require(!phase.empty(), "empty profile");
    const auto f = grid.frequencies();
    if (f_hz <= f.front()) {
        return phase.front();
    }
    if (f_hz >= f.back()) {
        return phase.back();
    }
    const auto it = std::upper_bound(f.begin(), f.end(), f_hz);
    const auto i = static_cast<std::size_t>(it - f.begin());
    const double t = (f_hz - f[i - 1]) / (f[i] - f[i - 1]);
    return phase[i - 1] + t * (phase[i] - phase[i - 1]);
}

FrequencyPhaseProfile FrequencyPhaseProfile::minus(const FrequencyPhaseProfile& other) const
{
    detail::require(other.size() == size(), "profiles are on different grids");
    FrequencyPhaseProfile out = *this;
    for (std::size_t i = 0; i < phase.size(); ++i) {
        out.phase[i] -= other.phase[i];
    }
    return out;
}

void unwrap_from(std::vector<double>& phase, std::size_t anchor)
{
    if (phase.empty()) {
        return;
    }
    for (std::size_t i = anchor + 1; i < phase.size(); ++i) {
        phase[i] = phase[i - 1] + wrap_pi(phase[i] - phase[i - 1]);
    }
    for (std::size_t i = anchor; i-- > 0;) {
        phase[i] = phase[i + 1] + wrap_pi(phase[i] - phase[i + 1]);
    }
}

FrequencyPhaseProfile estimate_phase_error(const SymbolSequence& x, const SymbolSequence& y, std::size_t begin,
                                           std::size_t end, const CpsdConfig& cfg)
{
    check_aligned(x, y);
    cfg.validate();
    detail::require(begin <= end && end <= x.size(), "estimation range outside the sequence");
    const std::size_t len = end - begin;
    detail::require(len >= cfg.segment, "block shorter than one CPSD segment");

    const std::size_t seg = cfg.segment;
    std::vector<double> window(seg);
    for (std::size_t n = 0; n < seg; ++n) {
        window[n] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(seg));
    }

    Fft fx(seg);
    Fft fy(seg);
    CVec cross(seg);
    for (std::size_t s = begin; s + seg <= end; s += cfg.hop) {
        auto bx = fx.buffer();
        auto by = fy.buffer();
        for (std::size_t n = 0; n < seg; ++n) {
            bx[n] = x.symbols[s + n] * window[n];
            by[n] = y.symbols[s + n] * window[n];
        }
        fx.forward();
        fy.forward();
        for (std::size_t k = 0; k < seg; ++k) {
            cross[k] += by[k] * std::conj(bx[k]);
        }
    }

    const double rs = x.symbol_rate;
    const FrequencyGrid full = FrequencyGrid::centered(seg, rs);
    const double limit = (1.0 + cfg.rolloff) * rs / 2.0;
    const auto keep = full.indices_within(limit);

    FrequencyPhaseProfile prof;
    prof.grid = full.restricted(limit);
    prof.symbol_rate = rs;
    prof.phase.reserve(keep.size());
    prof.weight.reserve(keep.size());
    const std::size_t shift = seg / 2; // centered index i -> FFT bin (i + seg - seg/2) % seg
    for (auto i : keep) {
        const cplx s = cross[(i + seg - shift) % seg];
        prof.phase.push_back(std::arg(s));
        prof.weight.push_back(std::abs(s));
    }
    const auto peak = std::max_element(prof.weight.begin(), prof.weight.end());
    if (peak == prof.weight.end() || !(*peak > 0.0) || !std::isfinite(*peak)) {
        throw EstimationError("degenerate block: cross spectrum is zero");
    }
    unwrap_from(prof.phase, static_cast<std::size_t>(peak - prof.weight.begin()));
    return prof;
}

double PolynomialPhase::evaluate(double f_hz) const
{
    const double u = f_hz / norm_hz;
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
        acc = acc * u + *it;
    }
    return acc;
}

double PolynomialPhase::per_hz(int k) const
{
    detail::require(k >= 0 && k <= order(), "coefficient index out of range");
    return coefficients[static_cast<std::size_t>(k)] / std::pow(norm_hz, k);
}

PolynomialPhase fit_polynomial(const FrequencyPhaseProfile& profile, int order)
{
    detail::require(order >= 0 && order <= kMaxFitOrder, "fit order must lie in [0, 9]");
    const std::size_t n = profile.size();
    detail::require(static_cast<std::size_t>(order) < n, "fit order must be below the number of bins");

    const double norm = profile.symbol_rate / 2.0;
    const auto cols = static_cast<Eigen::Index>(order + 1);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), cols);
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = profile.weight[i];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw EstimationError("profile weights must be finite and non-negative");
        }
        wsum += w;
        const double sw = std::sqrt(w);
        const double u = profile.grid[i] / norm;
        double p = 1.0;
        for (Eigen::Index k = 0; k < cols; ++k) {
            a(static_cast<Eigen::Index>(i), k) = sw * p;
            p *= u;
        }
        b(static_cast<Eigen::Index>(i)) = sw * profile.phase[i];
    }
    if (!(wsum > 0.0)) {
        throw EstimationError("all profile weights are zero");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < cols) {
        throw EstimationError("rank-deficient polynomial fit (too few weighted bins)");
    }
    const Eigen::VectorXd c = qr.solve(b);

    PolynomialPhase fit;
    fit.norm_hz = norm;
    fit.coefficients.assign(c.data(), c.data() + c.size());
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = profile.phase[i] - fit.evaluate(profile.grid[i]);
        res += profile.weight[i] * r * r;
    }
    fit.residual_rms = std::sqrt(res / wsum);
    return fit;
}

double explained_variance(const FrequencyPhaseProfile& profile, const PolynomialPhase& fit)
{
    const double mean = weighted_mean(profile.phase, profile.weight);
    double total = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double d = profile.phase[i] - mean;
        total += profile.weight[i] * d * d;
        wsum += profile.weight[i];
    }
    total /= wsum;
    if (total <= 0.0) {
        return 1.0;
    }
    return 1.0 - fit.residual_rms * fit.residual_rms / total;
}

double timing_offset_from_slope(const PolynomialPhase& fit, double symbol_rate)
{
    detail::require(fit.order() >= 1, "timing offset needs a fit of order >= 1");
    const double band_change = fit.per_hz(1) * symbol_rate;
    return band_change / (2.0 * std::numbers::pi);
}

double max_excursion(const FrequencyPhaseProfile& profile)
{
    detail::require(!profile.phase.empty(), "empty profile");
    const auto [lo, hi] = std::minmax_element(profile.phase.begin(), profile.phase.end());
    return *hi - *lo;
}

double residual_phase_error(const FrequencyPhaseProfile& profile, int order)
{
    const int ord = std::min<int>(order, static_cast<int>(profile.size()) - 1);
    const PolynomialPhase fit = fit_polynomial(profile, ord);
    std::vector<double> smooth(profile.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        smooth[i] = fit.evaluate(profile.grid[i]);
    }
    const double mean = weighted_mean(smooth, profile.weight);
    double peak = 0.0;
    for (double v : smooth) {
        peak = std::max(peak, std::abs(v - mean));
    }
    return peak;
}

int select_fit_order(const FrequencyPhaseProfile& profile, double threshold, int max_order)
{
    const int top = std::min<int>(max_order, static_cast<int>(profile.size()) - 1);
    for (int k = 1; k <= top; ++k) {
        if (explained_variance(profile, fit_polynomial(profile, k)) >= threshold) {
            return k;
        }
    }
    return 0;
}

double band_average_phase(const FrequencyPhaseProfile& profile, double f_lo, double f_hi)
{
    cplx acc{};
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.grid[i] >= f_lo && profile.grid[i] <= f_hi) {
            acc += profile.weight[i] * std::polar(1.0, profile.phase[i]);
        }
    }
    if (std::abs(acc) == 0.0) {
        throw EstimationError("no weighted bins inside the requested band");
    }
    return std::arg(acc);
}

double resolve_phase_ambiguity(const SymbolSequence& x, SymbolSequence& y, std::size_t begin, std::size_t end,
                               double symmetry)
{
    check_aligned(x, y);
    detail::require(begin < end && end <= x.size(), "ambiguity range outside the sequence");
    detail::require(symmetry > 0.0, "symmetry must be > 0");
    cplx corr{};
    for (std::size_t k = begin; k < end; ++k) {
        corr += y.symbols[k] * std::conj(x.symbols[k]);
    }
    // y ~ x * exp(j*theta); remove the multiple of `symmetry` closest to theta
    const double rotation = symmetry * std::round(std::arg(corr) / symmetry);
    if (rotation != 0.0) {
        const cplx r = std::polar(1.0, -rotation);
        for (auto& v : y.symbols) {
            v *= r;
        }
    }
    return rotation;
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    detail::require(a.size() == b.size() && a.size() >= 2, "spearman needs two equal samples of size >= 2");
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

BlockReport analyze_block(const SymbolSequence& x, const SymbolSequence& y, const BlockPartition& partition,
                          std::size_t block, const AnalysisConfig& cfg)
{
    detail::require(block < partition.n_blocks, "block index out of range");
    const auto lo = partition.block_begin(block);
    const auto hi = partition.block_end(block);

    BlockReport r;
    r.block_index = block;
    r.t_start_ns = static_cast<double>(lo) / x.symbol_rate * 1e9;
    r.snr_db = range_snr_db(std::span(x.symbols).subspan(lo, partition.block_size),
                            std::span(y.symbols).subspan(lo, partition.block_size));
    r.profile = estimate_phase_error(x, y, lo, hi, cfg.cpsd);
    const int top = std::min<int>(cfg.max_fit_order, static_cast<int>(r.profile.size()) - 1);
    for (int k = 1; k <= top; ++k) {
        r.fits.push_back(fit_polynomial(r.profile, k));
    }
    r.max_excursion_rad = max_excursion(r.profile);
    r.timing_offset_ui = timing_offset_from_slope(r.fits.front(), x.symbol_rate);
    r.fit_order_selected = 0;
    for (const auto& f : r.fits) {
        if (explained_variance(r.profile, f) >= cfg.selection_threshold) {
            r.fit_order_selected = f.order();
            break;
        }
    }
    r.degraded = std::abs(r.timing_offset_ui) > cfg.degraded_offset_ui;
    return r;
}

} // namespace eepn
