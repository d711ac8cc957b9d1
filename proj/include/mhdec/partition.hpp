#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhdec/geometry.hpp"
#include "mhdec/parametric.hpp"
#include "mhdec/polyalg.hpp"

namespace mhdec {

// Declaration order is the sort order of pieces.
enum class CaseTag : int { FLAT_CORE = 0, NONDEG, A1, A1_POWER, A2, B1, B2 };
const char* to_string(CaseTag t);
std::optional<CaseTag> case_tag_from_string(const std::string& s);

struct EngineConfig {
    double c_phi = 0.25;          // initial separation constant
    bool adaptive_c_phi = true;   // halve c_phi on a failed estimate
    int max_halvings = 20;
    double C_flat = 64;
    double M_bound = 100;         // ceiling for |mu|
    int max_recursion = 64;
    bool verify_inline = true;    // sampled estimate checks
    std::uint64_t seed = 1;
    double sim_factor = 32;       // "~" and "<~" tolerance
    double tile_fraction = 0.9;   // tiles target tile_fraction * C_flat * delta
    std::size_t max_pieces = 20'000'000;
};

// An estimate required by the construction failed on sampled points.
class EstimateViolation : public std::runtime_error {
public:
    EstimateViolation(std::string lemma_name, const std::string& detail)
        : std::runtime_error(lemma_name + ": " + detail), lemma(std::move(lemma_name)) {}
    std::string lemma;
};

class ConstructionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NotMixedHomogeneous : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PartitionPiece {
    Parallelogram shape;  // in [-1,1]^2 coordinates
    CaseTag tag = CaseTag::NONDEG;
    int radial_level = 0;  // 0 for the core and for cylinder strips
    int band_level = 0;
    double sigma = 0;
    int l_level = 0;
    int frame = 0;  // index into Partition::frames
};

struct ComponentInfo {
    std::string kind;  // x-axis, y-axis, curve, line
    int quadrant = 0;  // 0..3 for (+,+), (-,+), (-,-), (+,-)
    CaseTag tag = CaseTag::NONDEG;
    int k = 0;
    double lambda = 0;
};

struct PartitionStats {
    std::size_t pieces = 0;
    std::map<CaseTag, std::size_t> per_case;
    int radial_levels = 0;
    double c_phi = 0;
    int c_phi_halvings = 0;
    double M_phi = 0;  // largest |mu| met by the shear steps
    std::vector<ComponentInfo> components;
    std::vector<std::string> warnings;
};

struct Partition {
    BivariatePoly phi;
    double delta = 0;
    MixedHomogeneity mh;
    EngineConfig config;
    bool l2_applicable = false;
    std::vector<PartitionPiece> pieces;
    // Level frames: model (annulus) coordinates -> [-1,1]^2 coordinates.
    std::vector<AffineMap> frames;
    PartitionStats stats;

    // [unit cell -> model frame, model frame -> plane]
    std::vector<AffineMap> chain(const PartitionPiece& p) const;
    std::vector<Parallelogram> shapes() const;
};

Partition decompose(const BivariatePoly& phi, double delta, const EngineConfig& cfg = {});

// Degenerate components of det D^2 phi per quadrant with their case tags, as decompose plans them
// (no tiling). Empty when K is a nonzero constant or vanishes identically.
std::vector<ComponentInfo> degenerate_components(const BivariatePoly& phi, double c_phi = 0.25);

// ---- serialization ----

inline constexpr const char* kPartitionSchemaVersion = "mhdec-partition/1";

struct RunManifest {
    std::string command;
    std::string tool_version;
    std::string timestamp;  // excluded from the determinism contract
    std::string poly;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // flag -> value, in flag order
};

// Stable field order, floats with 17 significant digits.
std::string partition_to_json(const Partition& p, const RunManifest* manifest = nullptr);
// Restores phi, delta, weights, config, frames and pieces; throws std::runtime_error on schema errors.
Partition partition_from_json(const std::string& text);
std::string partition_to_svg(const Partition& p);

// ---- verification ----

struct VerifyReport {
    CoverageReport coverage;
    double worst_ratio = 0;       // sampled flatness sup / delta, worst piece
    std::size_t worst_piece = 0;  // index into Partition::pieces
    std::size_t pieces = 0;
    double C_flat = 0;
    bool covered() const { return coverage.covered_fraction == 1.0; }
    bool flat() const { return worst_ratio <= C_flat; }
    bool ok() const { return covered() && flat(); }
};

// Coverage of [-1,1]^2 by n_samples seeded points and the worst flatness ratio over all pieces
// on a grid_n x grid_n sample grid per piece.
VerifyReport verify_partition(const Partition& p, long n_samples, int grid_n, std::uint64_t seed);

// ---- building blocks, exposed for testing ----

enum class RegionClass { Drop, Keep, Mixed };
using Classifier = std::function<RegionClass(const Parallelogram&)>;

struct TileOptions {
    double C_flat = 64;
    double fraction = 0.9;
    // Uniform: axis-parallel squares of side delta^{1/2} clipped to the region.
    // Adaptive: anisotropic cells sized by rigorous second-derivative bounds.
    enum class Mode { Uniform, Adaptive } mode = Mode::Adaptive;
    int max_depth = 12;
    std::size_t max_pieces = 20'000'000;
};

// Cells of the region's affine frame, each delta-flat for phi with ratio <= fraction * C_flat
// in Adaptive mode (certified by interval bounds).
std::vector<Parallelogram> tile_nondegenerate(const NumPoly& phi, double delta, const Parallelogram& region,
                                              const TileOptions& opt = {});

// Low-level adaptive tiler over a box of a frame: frame maps box coordinates to phi's coordinates.
void tile_region(const NumPoly& phi, const AffineMap& frame, const Box& box, double target, const Classifier& cls,
                 const std::function<void(const Parallelogram&)>& emit, int max_depth = 12,
                 std::size_t max_pieces = 20'000'000);

// Iterated cylindrical decoupling of tau in the family A_l(sigma), series parameter w = sigma^{1/2}.
struct CylinderLeaf {
    Parallelogram shape;  // leaf region in the coordinates of the top frame
    int depth = 0;
    double mu = 0;        // shear applied at the last level
};
struct CylinderResult {
    std::vector<CylinderLeaf> leaves;
    double max_mu = 0;
    std::vector<double> mus;  // every shear in generation order
};
CylinderResult cylindrical_decouple(const ParametricPoly<double>& tau, int l, double sigma, const Box& domain,
                                    double M_bound = 100, int max_recursion = 64);

// Shear-lemma measurement: max over y0 in [0,1] of |psi_xy(0, y0)| with psi = tau(x - mu y, y).
double shear_residual(const ParametricPolyQ& tau, int l, double w, int samples = 401);
// tau = phi(x + x_a, sigma y + sigma) / |phi_xx(x_a, 0)| minus its linear part, as a series in w = sigma^{1/2}.
ParametricPolyQ a2_band_series(const BivariatePoly& phi, const Rational& x_a);

// Sampled curve-band estimates for psi = phi(x, y + gamma(x0) + gamma'(x0)(x - x0)) on one strip of a B1 band.
struct B1Estimates {
    double psi_xx_over = 0;   // sup |psi_xx| / sigma^{k-1}
    double psi_yy_min = 0;    // inf |psi_yy| / sigma^{k-2}
    double psi_yy_max = 0;
    double det_min = 0;       // inf |det| / sigma^{2k-3}
    double det_max = 0;
};
B1Estimates b1_estimates(const NumPoly& phi, const CurveSpec& curve, double x0, double sigma, int k, double C_rs);

}  // namespace mhdec
