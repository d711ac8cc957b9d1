#pragma once

#include <map>
#include <string>
#include <vector>

#include "mhdec/partition.hpp"

namespace mhdec::detail {

// A piece in the coordinates of one quadrant of the annulus.
struct LocalPiece {
    Parallelogram shape;
    CaseTag tag = CaseTag::NONDEG;
    int band = 0;
    double sigma = 0;
    int l = 0;
};

// Per-level engine state; base maps engine coordinates to quadrant coordinates.
struct EngineContext {
    const EngineConfig* cfg = nullptr;
    double delta = 0;
    AffineMap base;
    std::vector<LocalPiece>* out = nullptr;
    double* max_mu = nullptr;
    std::vector<std::string>* warnings = nullptr;
    // Applied to tiles in base-target coordinates; drops tiles outside the level's own region.
    Classifier clip;

    double target() const { return cfg->tile_fraction * cfg->C_flat * delta; }
    void emit(const Parallelogram& engine_shape, CaseTag tag, int band, double sigma, int l) const;
};

// Sampled scale checks. A quantity normalized by its expected power of sigma must stay within
// sim_factor of the value recorded the first time the same name is checked.
class ScaleCheck {
public:
    ScaleCheck(std::string lemma, double factor) : lemma_(std::move(lemma)), factor_(factor) {}
    // lo, hi: extreme normalized magnitudes over the sample.
    void sim(const std::string& name, double lo, double hi);
    void lesssim(const std::string& name, double hi);

private:
    std::string lemma_;
    double factor_;
    std::map<std::string, std::pair<double, double>> ref_;
};

// Adaptive tiling of a box in the frame F (frame coordinates -> engine coordinates).
void tile_frame(const NumPoly& phi, const AffineMap& F, const Box& box, const EngineContext& ctx, CaseTag tag,
                int band, double sigma, int l, const Classifier& cls = {});

// Engine form of the cylinder recursion. tau lives in frame F; leaves are tiled for phi.
struct CylinderJob {
    const NumPoly* phi = nullptr;  // engine coordinates
    AffineMap top;                 // top tau frame -> engine coordinates
    int l_top = 0;
    double sigma = 0;              // family parameter, w = sigma^{1/2}
    CaseTag tag = CaseTag::A2;
    int band = 0;
    double sigma_report = 0;       // sigma recorded on emitted pieces
    Classifier cls;
};
void cylinder_tiled(const CylinderJob& job, const ParametricPoly<double>& tau, int l, const Box& dom,
                    const AffineMap& rel, int depth, const EngineContext& ctx);

struct AxisRegion {
    double x_lo = 1, x_hi = 2, c = 0.25;
};
void engine_A1(const NumPoly& phi, int k, const AxisRegion& R, const EngineContext& ctx);
void engine_A2(const NumPoly& phi, int k, const AxisRegion& R, const EngineContext& ctx);

struct CurveRegion {
    CurveSpec curve;
    double x_lo = 1, x_hi = 2, c = 0.25;
};
void engine_B1(const NumPoly& phi, int k, const CurveRegion& R, const EngineContext& ctx);
void engine_B2(const NumPoly& phi, int k, const CurveRegion& R, const EngineContext& ctx);

// Series in w for 1, w^k times a value.
inline UPoly<double> wmono(double c, int k) { return UPoly<double>::monomial(c, k); }
inline UPoly<double> wconst(double c) { return UPoly<double>::constant(c); }

}  // namespace mhdec::detail
