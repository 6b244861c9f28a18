#include "aidcots/admittance.hpp"

#include <vector>

namespace aidcots {

AdmittanceView::AdmittanceView(const Network& net, std::span<const std::uint8_t> mask)
    : AdmittanceView(net, mask, {}) {}

AdmittanceView::AdmittanceView(const Network& net, std::span<const std::uint8_t> mask,
                               std::span<const std::complex<double>> series_override)
    : net_(&net), mask_(mask.begin(), mask.end()) {
    const int n = static_cast<int>(net.bus_count());
    const std::size_t L = net.branch_count();
    if (mask.size() != L) throw Error("switching mask length does not match branch count");
    if (!series_override.empty() && series_override.size() != L) {
        throw Error("series override length does not match branch count");
    }

    series_.resize(L);
    stamps_.resize(L);
    active_.assign(L, 0);

    using T = Eigen::Triplet<double>;
    std::vector<T> gt, bt;
    gt.reserve(4 * L + net.bus_count());
    bt.reserve(4 * L + net.bus_count());

    for (std::size_t l = 0; l < L; ++l) {
        const Branch& br = net.branches()[l];
        const std::complex<double> y =
            series_override.empty() ? br.series_admittance() : series_override[l];
        series_[l] = y;

        const std::complex<double> t = std::polar(br.tap, br.shift);
        LineStamp& s = stamps_[l];
        s.dff = 1.0 / (br.tap * br.tap);
        s.dft = -1.0 / std::conj(t);
        s.dtf = -1.0 / t;
        s.dtt = 1.0;
        const std::complex<double> ych(0.0, br.b_charge / 2.0);
        s.ff = (y + ych) * s.dff;
        s.ft = y * s.dft;
        s.tf = y * s.dtf;
        s.tt = y + ych;

        if (!net.branch_active(static_cast<int>(l), mask)) continue;
        active_[l] = 1;
        const int f = net.from_index(static_cast<int>(l));
        const int to = net.to_index(static_cast<int>(l));
        gt.emplace_back(f, f, s.ff.real());
        gt.emplace_back(f, to, s.ft.real());
        gt.emplace_back(to, f, s.tf.real());
        gt.emplace_back(to, to, s.tt.real());
        bt.emplace_back(f, f, s.ff.imag());
        bt.emplace_back(f, to, s.ft.imag());
        bt.emplace_back(to, f, s.tf.imag());
        bt.emplace_back(to, to, s.tt.imag());
    }

    // Diagonal entries are always stored so G and B share one sparsity
    // pattern and every bus has a structural diagonal.
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses()[static_cast<std::size_t>(i)];
        gt.emplace_back(i, i, b.g_shunt);
        bt.emplace_back(i, i, b.b_shunt);
    }

    G_.resize(n, n);
    B_.resize(n, n);
    G_.setFromTriplets(gt.begin(), gt.end());
    B_.setFromTriplets(bt.begin(), bt.end());
    G_.makeCompressed();
    B_.makeCompressed();

    // G and B are built from the same triplet pattern, so walking columns of
    // the transposed pattern gives row views with both parts aligned.
    rows_.resize(static_cast<std::size_t>(n));
    Eigen::SparseMatrix<double, Eigen::RowMajor> gr(G_), br2(B_);
    for (int i = 0; i < n; ++i) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator git(gr, i), bit(br2, i);
             git && bit; ++git, ++bit) {
            rows_[static_cast<std::size_t>(i)].push_back({static_cast<int>(git.col()), git.value(), bit.value()});
        }
    }
}

Eigen::SparseMatrix<double> incidence(const Network& net) {
    const int n = static_cast<int>(net.bus_count());
    const int L = static_cast<int>(net.branch_count());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        t.emplace_back(net.from_index(l), l, 1.0);
        t.emplace_back(net.to_index(l), l, -1.0);
    }
    Eigen::SparseMatrix<double> a(n, L);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

}  // namespace aidcots
