#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twophase/operator.hpp"

namespace twophase {

enum class Certified { A1, A2, A3, derivative_bounds };

std::string to_string(Certified c);

/// One sample that broke the inequality. `margin` is the signed slack of the
/// tighter side (negative means violated).
struct Counterexample {
    std::size_t sample = 0;
    SymMatrix M;
    SymMatrix N;  ///< increment (A1), second matrix (A2), unused otherwise
    double t = 0.0;  ///< convex weight (A2)
    std::array<double, 3> xi{};  ///< direction (derivative bounds)
    Point x{};
    double margin = 0.0;
};

struct CertificationReport {
    Certified assumption = Certified::A1;
    std::size_t samples = 0;
    std::vector<Counterexample> violations;  ///< first kMaxStored only
    std::size_t violation_count = 0;
    bool pass = true;
    double worst_margin = 0.0;

    static constexpr std::size_t kMaxStored = 16;
};

/// Sampling checks of the structural assumptions. Each sample draws from its
/// own stream keyed by (seed, index), so reports are reproducible. A handful
/// of fixed probes (e.g. M = -I, N = eps I) precede the random draws and
/// count towards `samples`; n_samples = 0 gives a vacuous pass.
CertificationReport certify_A1(const Operator& op, std::size_t n_samples, std::uint64_t seed);
CertificationReport certify_A2(const Operator& op, std::size_t n_samples, std::uint64_t seed);
CertificationReport certify_A3(const Operator& op, std::size_t n_samples, std::uint64_t seed);
CertificationReport certify_derivative_bounds(const Operator& op, std::size_t n_samples,
                                              std::uint64_t seed);

/// Random symmetric matrix with N(0,1) entries times a log-uniform scale in [0.1, 10].
SymMatrix random_symmetric(int dim, std::mt19937_64& rng);
/// G^T G with Gaussian G, rescaled so that |N|_F is log-uniform in [1e-3, 10].
SymMatrix random_psd(int dim, std::mt19937_64& rng);

}  // namespace twophase
