#include "mhdec/partition.hpp"

namespace mhdec {

VerifyReport verify_partition(const Partition& p, long n_samples, int grid_n, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("verify: sample count must be positive");
    VerifyReport rep;
    rep.pieces = p.pieces.size();
    rep.C_flat = p.config.C_flat;
    std::vector<Parallelogram> shapes = p.shapes();
    rep.coverage = coverage_and_overlap(shapes, Box{-1, 1, -1, 1}, n_samples, seed);
    NumPoly phi = NumPoly::from_exact(p.phi);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (shapes[i].degenerate()) throw std::runtime_error("verify: piece " + std::to_string(i) + " is degenerate");
        double r = flatness(phi, shapes[i], p.delta, grid_n, false).ratio;
        if (r > rep.worst_ratio) {
            rep.worst_ratio = r;
            rep.worst_piece = i;
        }
    }
    return rep;
}

}  // namespace mhdec
