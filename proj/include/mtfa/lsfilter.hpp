#pragma once
// Least-squares adaptive filtering in the generalized-convolution domain.
//
// design_lsaf: given an observed and a target distribution on one lattice,
// compute the filter whose generalized convolution with the observation is
// the regularized least-squares match to the target.  The design works in
// the spectral domain of the convolution, where composition is a pointwise
// product, so the solution is a per-node regularized deconvolution.
//
// wiener_hopf_numeric: the stationary-point equations of the same problem
// posed through correlation data.  Dense normal equations over the lattice,
// solved by a rank-revealing decomposition; intentionally capped at small
// grids.
//
// MwdInverter: recover a signal estimate from a distribution in a given
// metaplectic Wigner domain by undoing the forward stages in turn (partial
// transform, coordinate change, component transform).  Stages whose
// discrete map is not unitary are inverted through pseudo-inverses built
// from the forward operators themselves.

#include <Eigen/Dense>

#include "mtfa/gmconv.hpp"
#include "mtfa/wigner.hpp"

namespace mtfa {

struct FilterDesign {
  Field2 h;         // filter on the distribution lattice
  Field2 transfer;  // spectral transfer on the conjugate lattice pair
  double eps = 0.0; // relative regularization actually applied
};

// Least-squares filter for convolve(w_obs, h, t) ~= w_target, regularized
// by eps relative to the peak observed spectral power.
FilterDesign design_lsaf(const Field2& w_obs, const Field2& w_target,
                         const GmcTriple& t, double eps = 1e-6,
                         ExecPolicy pol = ExecPolicy::Parallel);

Field2 apply_filter(const Field2& w, const FilterDesign& d, const GmcTriple& t,
                    ConvMethod method = ConvMethod::Direct,
                    ExecPolicy pol = ExecPolicy::Parallel);

// Mean squared entrywise difference between two fields on one lattice.
double wigner_mse(const Field2& a, const Field2& b);

// Stationarity check of the least-squares solution: correlation between the
// chirped residual (est - target) and every lattice shift of the chirped
// observation, normalized by their RMS values.  Near zero at an optimum.
double orthogonality_residual(const Field2& w_est, const Field2& w_target,
                              const Field2& w_obs, const GmcTriple& t);

struct WienerHopfInput {
  Grid2 g;  // lattice; both axes must contain the origin
  // auto_corr(d, j): correlation of the chirped observation at lattice
  // offset d (indexed as a grid point) against reference point j.
  // cross_corr(i, j): correlation of the chirped target at grid point i
  // against the chirped observation at reference point j.
  Eigen::MatrixXcd auto_corr;
  Eigen::MatrixXcd cross_corr;
};

struct WienerHopfResult {
  Field2 h;               // de-chirped filter on the lattice
  double residual = 0.0;  // relative residual over all stacked blocks
  int rank = 0;
  bool pseudo_inverse = false;  // rank-deficient normal equations
};

// Solve sum_q h~(q) R_auto(z - q, z') dA = R_cross(z, z') for all grid
// pairs (z, z') in the least-squares sense, then remove the filter chirp.
WienerHopfResult wiener_hopf_numeric(const WienerHopfInput& in, const GmcTriple& t,
                                     double rcond = 1e-10,
                                     ExecPolicy pol = ExecPolicy::Parallel);

// Signal recovery from a metaplectic Wigner distribution on the lattice
// (tgrid x ugrid).  Requires matching component matrices and a coordinate
// matrix whose warped arguments land on a refined lattice (plan_tensor_lattice).
// The second-variable transform is undone exactly when its discrete map is
// unitary and through a pseudo-inverse otherwise; the component values are
// read off anchor lines of the recovered tensor and averaged over every
// line whose reference value is known, then mapped back to the signal by
// the pseudo-inverse of the forward component stage.  The estimate carries
// an arbitrary unimodular factor.
class MwdInverter {
 public:
  MwdInverter(const MWDConfig& cfg, const Grid1& tgrid, const Grid1& ugrid);

  Signal invert(const Field2& w, ExecPolicy pol = ExecPolicy::Parallel) const;

  const Grid1& tgrid() const { return tgrid_; }
  const Grid1& ugrid() const { return ugrid_; }

 private:
  MWDConfig cfg_;
  Grid1 tgrid_;
  Grid1 ugrid_;
  TensorLattice plan_;
  bool row_exact_ = false;      // unitary second-variable stage
  Eigen::MatrixXcd row_pinv_;   // otherwise: pseudo-inverse of the row map
  int i00_ = 0, j00_ = 0;       // tensor cell carrying both arguments at 0
  long shift12_ = 0;            // fine2 node k maps to fine1 node k + shift12_
  std::vector<long> rows_;      // recoverable component-lattice nodes
  Eigen::MatrixXcd comp_pinv_;  // pseudo-inverse of the component stage on rows_
};

}  // namespace mtfa
