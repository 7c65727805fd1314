#include "ldme/wavelet.hpp"

#include <stdexcept>

#include "ldme/signal.hpp"

namespace ldme {

namespace {

// Orthogonal scaling filters from the standard Daubechies construction
// (spectral factorization; least-asymmetric selection for the symlets).
// Verified: orthonormality residual < 1e-15, sum = sqrt(2).
constexpr double k_db4[8] = {
    -0.010597401785069032, 0.032883011666885200,  0.030841381835560764, -0.18703481171909308,
    -0.027983769416859854, 0.63088076792985891,   0.71484657055291565,  0.23037781330889650,
};

constexpr double k_sym4[8] = {
    0.032223100604051468,  -0.012603967262031304, -0.099219543576633533, 0.29785779560530605,
    0.80373875180513208,   0.49761866763277499,   -0.029635527646002492, -0.075765714789502213,
};

constexpr double k_sym8[16] = {
    -0.0033824159510050026, -0.00054213233180001069, 0.031695087811525991,  0.0076074873249766082,
    -0.14329423835127266,   -0.061273359067811078,   0.48135965125905339,   0.77718575169962803,
    0.36444189483617894,    -0.051945838107881801,   -0.027219029917103486, 0.049137179673730287,
    0.0038087520138944895,  -0.014952258337062199,   -0.00030292051472413308, 0.0018899503327676892,
};

std::span<const double> scaling_filter(WaveletFamily family) {
    switch (family) {
        case WaveletFamily::db4: return {k_db4, 8};
        case WaveletFamily::sym4: return {k_sym4, 8};
        case WaveletFamily::sym8: return {k_sym8, 16};
    }
    throw Error("unknown wavelet family");
}

struct FilterPair {
    std::vector<double> lo;
    std::vector<double> hi;
};

FilterPair filter_pair(WaveletFamily family) {
    const auto h = scaling_filter(family);
    FilterPair f;
    f.lo.assign(h.begin(), h.end());
    f.hi.resize(h.size());
    // quadrature mirror: g[k] = (-1)^k h[F-1-k]
    for (std::size_t k = 0; k < h.size(); ++k) {
        f.hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[h.size() - 1 - k];
    }
    return f;
}

// One analysis step with circular extension: N even, N >= filter length.
void analysis_step(std::span<const double> x, const FilterPair& f,
                   std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    const std::size_t flen = f.lo.size();
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        std::size_t idx = 2 * i;
        for (std::size_t k = 0; k < flen; ++k) {
            const double v = x[idx];
            a += f.lo[k] * v;
            d += f.hi[k] * v;
            if (++idx == n) idx = 0;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

// Transpose of the analysis step; exact inverse for orthogonal filters.
std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   const FilterPair& f) {
    const std::size_t half = approx.size();
    const std::size_t n = 2 * half;
    const std::size_t flen = f.lo.size();
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const double a = approx[i];
        const double d = detail[i];
        std::size_t idx = 2 * i;
        for (std::size_t k = 0; k < flen; ++k) {
            x[idx] += f.lo[k] * a + f.hi[k] * d;
            if (++idx == n) idx = 0;
        }
    }
    return x;
}

}  // namespace

WaveletFamily wavelet_family_from_string(const std::string& name) {
    if (name == "sym4") return WaveletFamily::sym4;
    if (name == "sym8") return WaveletFamily::sym8;
    if (name == "db4") return WaveletFamily::db4;
    throw Error("unsupported wavelet family '" + name + "' (supported: sym4, sym8, db4)");
}

std::string to_string(WaveletFamily family) {
    switch (family) {
        case WaveletFamily::sym4: return "sym4";
        case WaveletFamily::sym8: return "sym8";
        case WaveletFamily::db4: return "db4";
    }
    return "?";
}

std::size_t wavelet_filter_length(WaveletFamily family) {
    return scaling_filter(family).size();
}

std::size_t WaveletCoeffs::signal_length() const {
    std::size_t n = approx.size();
    for (auto it = details.rbegin(); it != details.rend(); ++it) n += it->size();
    return n;
}

WaveletCoeffs dwt(std::span<const double> x, WaveletFamily family, int levels) {
    if (levels < 1) throw Error("dwt: levels must be >= 1");
    const auto f = filter_pair(family);
    const std::size_t flen = f.lo.size();

    WaveletCoeffs out;
    std::vector<double> current(x.begin(), x.end());
    for (int l = 0; l < levels; ++l) {
        if (current.size() % 2 != 0) {
            throw Error("dwt: length " + std::to_string(current.size()) + " at level " +
                        std::to_string(l + 1) + " is odd; signal length must be divisible by 2^levels");
        }
        if (current.size() < flen) {
            throw Error("dwt: signal too short for " + std::to_string(levels) + " levels of " +
                        to_string(family) + " (length " + std::to_string(current.size()) +
                        " at level " + std::to_string(l + 1) + ", filter length " +
                        std::to_string(flen) + ")");
        }
        std::vector<double> approx;
        std::vector<double> detail;
        analysis_step(current, f, approx, detail);
        out.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    out.approx = std::move(current);
    return out;
}

std::vector<double> idwt(const WaveletCoeffs& coeffs, WaveletFamily family) {
    if (coeffs.details.empty()) throw Error("idwt: no detail bands");
    const auto f = filter_pair(family);
    std::vector<double> current = coeffs.approx;
    for (auto it = coeffs.details.rbegin(); it != coeffs.details.rend(); ++it) {
        if (it->size() != current.size()) {
            throw Error("idwt: inconsistent band sizes");
        }
        current = synthesis_step(current, *it, f);
    }
    return current;
}

int max_dwt_levels(std::size_t n, WaveletFamily family) {
    const std::size_t flen = wavelet_filter_length(family);
    int levels = 0;
    while (n % 2 == 0 && n >= flen) {
        ++levels;
        n /= 2;
    }
    return levels;
}

}  // namespace ldme
