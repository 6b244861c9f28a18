#pragma once

#include <Eigen/SparseCore>
#include <complex>
#include <span>

#include "aidcots/network.hpp"

namespace aidcots {

/// Per-branch pi-model contribution to the bus admittance matrix, plus the
/// derivative of that contribution with respect to the series admittance.
/// With tap t = tau * exp(j*shift) on the from side:
///   Yff = (y + j*bc/2)/tau^2, Yft = -y/conj(t), Ytf = -y/t, Ytt = y + j*bc/2
struct LineStamp {
    std::complex<double> ff, ft, tf, tt;      // actual contribution
    std::complex<double> dff, dft, dtf, dtt;  // d(contribution)/d(series y)
};

/// Bus admittance matrix of the network under a switching mask, split into
/// real and imaginary parts. Immutable once built; rebuilding from the same
/// mask is bit-identical.
class AdmittanceView {
public:
    AdmittanceView(const Network& net, std::span<const std::uint8_t> mask);
    /// Stamps with the given per-line series admittances in place of the ones
    /// derived from branch impedances. Used for parameter perturbations.
    AdmittanceView(const Network& net, std::span<const std::uint8_t> mask,
                   std::span<const std::complex<double>> series_override);

    const Network& net() const noexcept { return *net_; }
    const SwitchMask& mask() const noexcept { return mask_; }

    const Eigen::SparseMatrix<double>& G() const noexcept { return G_; }
    const Eigen::SparseMatrix<double>& B() const noexcept { return B_; }

    /// Series admittance y_l = g_l + j b_l of branch l (independent of mask).
    std::complex<double> series(int branch) const {
        return series_[static_cast<std::size_t>(branch)];
    }
    /// True when branch l contributes to this view.
    bool active(int branch) const { return active_[static_cast<std::size_t>(branch)] != 0; }
    const LineStamp& stamp(int branch) const { return stamps_[static_cast<std::size_t>(branch)]; }

    struct YEntry {
        int bus;  // column index k
        double g, b;
    };
    /// Row i of Y as (k, G_ik, B_ik) entries, diagonal included.
    const std::vector<YEntry>& row(int bus) const { return rows_[static_cast<std::size_t>(bus)]; }

private:
    const Network* net_;
    SwitchMask mask_;
    SwitchMask active_;
    Eigen::SparseMatrix<double> G_, B_;
    std::vector<std::complex<double>> series_;
    std::vector<LineStamp> stamps_;
    std::vector<std::vector<YEntry>> rows_;
};

inline AdmittanceView build_admittance(const Network& net, std::span<const std::uint8_t> mask) {
    return AdmittanceView(net, mask);
}

/// Signed bus-branch incidence: column l carries +1 at the from bus and -1 at
/// the to bus of branch l. Every branch appears regardless of service state.
Eigen::SparseMatrix<double> incidence(const Network& net);

}  // namespace aidcots
