#include "aoi/analytic.hpp"

#include <Eigen/SparseCore>
#include <stdexcept>

namespace aoi {

SourceAoIMatrices success_fail_matrices(const SystemSpec& spec, int k) {
    const auto& src = spec.sources[k];
    SourceAoIMatrices out;
    out.p_k = Eigen::VectorXd::Zero(src.num_states);
    for (int n = 0; n < spec.num_sensors; ++n)
        out.p_k += spec.channel(n) * src.obs_prob.row(n).transpose();
    out.p_k /= spec.num_sensors;
    out.r_succ = out.p_k.asDiagonal() * src.transition;
    out.r_fail = (Eigen::VectorXd::Ones(src.num_states) - out.p_k).asDiagonal() * src.transition;
    return out;
}

bool fail_matrix_contracts(const SourceAoIMatrices& m, int max_power) {
    Eigen::MatrixXd pw = m.r_fail;
    for (int i = 0; i < max_power; ++i) {
        if (pw.cwiseAbs().rowwise().sum().maxCoeff() < 1.0) return true;
        pw = pw * m.r_fail;
    }
    return false;
}

RandomPolicyAoI random_policy_aoi(const SystemSpec& spec) {
    RandomPolicyAoI out;
    const int k = spec.num_sources();
    out.per_source.resize(k);
    for (int i = 0; i < k; ++i) {
        auto m = success_fail_matrices(spec, i);
        if (!fail_matrix_contracts(m)) throw std::runtime_error("non-observable source");
        Eigen::VectorXd beta = stationary_distribution(spec.sources[i]);
        Eigen::MatrixXd a =
            Eigen::MatrixXd::Identity(m.r_fail.rows(), m.r_fail.cols()) - m.r_fail;
        // (I - r_fail)^-2 1 as two successive solves.
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.r_fail.rows());
        Eigen::VectorXd v = a.fullPivLu().solve(ones);
        v = a.fullPivLu().solve(v);
        out.per_source(i) = beta.dot(m.r_succ * v);
    }
    out.overall = out.per_source.mean();
    return out;
}

double random_policy_aoi_stateless(const SystemSpec& spec) {
    const int k = spec.num_sources();
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        if (spec.sources[i].num_states != 1)
            throw std::invalid_argument("stateless form requires single-state sources");
        double denom = 0.0;
        for (int n = 0; n < spec.num_sensors; ++n)
            denom += spec.channel(n) * spec.sources[i].obs_prob(n, 0);
        if (denom <= 0.0) throw std::runtime_error("non-observable source");
        total += 1.0 / denom;
    }
    return spec.num_sensors * total / k;
}

Eigen::VectorXd truncated_chain_block(const SystemSpec& spec, int k, int q) {
    auto m = success_fail_matrices(spec, k);
    Eigen::RowVectorXd phi =
        stationary_distribution(spec.sources[k]).transpose() * m.r_succ;
    for (int i = 1; i < q; ++i) phi = phi * m.r_fail;
    return phi.transpose();
}

TruncatedChainResult truncated_chain_aoi(const SystemSpec& spec, int k, int trunc_q,
                                         std::size_t size_cap) {
    if (trunc_q < 2) throw std::invalid_argument("trunc_q must be >= 2");
    const int s = spec.sources[k].num_states;
    const std::size_t dim = static_cast<std::size_t>(s) * trunc_q;
    if (dim > size_cap) throw std::runtime_error("matrix too large");
    auto m = success_fail_matrices(spec, k);

    // Sparse system (Psi^T - I) phi = 0 with one equation replaced by the
    // normalization sum(phi) = 1. Block row q of Psi has r_succ in block
    // column 1 and r_fail in block column q+1 (the last row self-loops on Q).
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    auto add_block = [&](int block_row, int block_col, const Eigen::MatrixXd& blk) {
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                if (blk(i, j) != 0.0)
                    trips.emplace_back(block_col * s + j, block_row * s + i, blk(i, j));
    };
    for (int q = 0; q < trunc_q; ++q) {
        add_block(q, 0, m.r_succ);
        int fail_col = std::min(q + 1, trunc_q - 1);
        add_block(q, fail_col, m.r_fail);
    }
    Eigen::SparseMatrix<double> psi_t(static_cast<int>(dim), static_cast<int>(dim));
    psi_t.setFromTriplets(trips.begin(), trips.end());
    psi_t.makeCompressed();

    // Fixed-point iteration phi <- phi Psi with normalization. A direct LU
    // factorization fills in badly at large Q (every block row feeds block
    // column 1), while each sparse product here is O(nnz).
    Eigen::VectorXd phi = Eigen::VectorXd::Constant(static_cast<int>(dim), 1.0 / double(dim));
    Eigen::VectorXd next(static_cast<int>(dim));
    const long max_iters = 2'000'000;
    double diff = 1.0;
    for (long it = 0; it < max_iters && diff > 1e-13; ++it) {
        next.noalias() = psi_t * phi;
        next /= next.sum();
        diff = (next - phi).cwiseAbs().maxCoeff();
        std::swap(phi, next);
    }
    if (diff > 1e-13) throw std::runtime_error("stationary solve failed");

    TruncatedChainResult out;
    out.blocks.reserve(trunc_q);
    for (int q = 0; q < trunc_q; ++q) {
        Eigen::VectorXd blk = phi.segment(q * s, s);
        out.mean_aoi += (q + 1) * blk.sum();
        out.blocks.push_back(std::move(blk));
    }
    return out;
}

}  // namespace aoi
