#pragma once

// Hot loops of the toolkit. Each kernel has an OpenMP implementation used in
// production and a plain serial reference kept for tests and benchmarks.

#include <cstddef>
#include <span>

namespace arsep::kernels {

enum class Backend { Parallel, Serial };

/// Read-only view of an isotropic Gaussian mixture whose component means are
/// rows of a row-major matrix. Kernels may use a prefix of each row, which is
/// the exact marginal of the mixture on the leading coordinates.
struct MixtureView {
  std::span<const double> means;        // components x stride
  std::size_t stride = 0;
  std::span<const double> log_weights;  // components
  std::span<const double> variances;    // components

  std::size_t components() const { return log_weights.size(); }
};

/// Score of the sigma-smoothed mixture marginal on the first `len`
/// coordinates, for `batch` row-major inputs xs (batch x len). Writes scores
/// into out (batch x len) and, if nonempty, log-densities into log_density.
void mixture_score(Backend backend, const MixtureView& mixture, std::span<const double> xs,
                   std::size_t batch, std::size_t len, double sigma, std::span<double> out,
                   std::span<double> log_density = {});

void mixture_score_serial(const MixtureView& mixture, std::span<const double> xs,
                          std::size_t batch, std::size_t len, double sigma,
                          std::span<double> out, std::span<double> log_density);

void mixture_score_omp(const MixtureView& mixture, std::span<const double> xs,
                       std::size_t batch, std::size_t len, double sigma,
                       std::span<double> out, std::span<double> log_density);

/// One generalized-KL multiplicative update of H then W for V ~= W H.
/// V is rows x cols, W is rows x rank, H is rank x cols, all row-major.
/// Divisions are floored at eps.
void kl_nmf_update(Backend backend, std::span<const double> V, std::span<double> W,
                   std::span<double> H, std::size_t rows, std::size_t cols, std::size_t rank,
                   double eps, bool update_w = true);

void kl_nmf_update_serial(std::span<const double> V, std::span<double> W, std::span<double> H,
                          std::size_t rows, std::size_t cols, std::size_t rank, double eps,
                          bool update_w);

void kl_nmf_update_omp(std::span<const double> V, std::span<double> W, std::span<double> H,
                       std::size_t rows, std::size_t cols, std::size_t rank, double eps,
                       bool update_w);

/// Number of worker threads the parallel kernels will use.
int max_threads();
void set_threads(int threads);

}  // namespace arsep::kernels
