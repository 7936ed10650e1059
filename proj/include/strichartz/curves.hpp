#pragma once

#include <functional>
#include <string>
#include <vector>

#include "strichartz/grid.hpp"

namespace strz {

enum class CurveKind { HomOdd, HomEven, Inhom35, InhomEven35, Schrod };

struct CurveSpec {
    CurveKind kind = CurveKind::HomOdd;
    int ell = 3;      // HomOdd / HomEven
    double c = 1.0;   // Schrod
    int sign = 1;     // Schrod

    static CurveSpec hom_odd(int ell);
    static CurveSpec hom_even(int ell);
    static CurveSpec inhom35() { return {CurveKind::Inhom35, 5, 1.0, 1}; }
    static CurveSpec inhom_even35() { return {CurveKind::InhomEven35, 5, 1.0, 1}; }
    static CurveSpec schrod(double c, int sign);
    static CurveSpec parse(const std::string& text);
    std::string encode() const;

    double phase(double xi) const;
    double phase_d1(double xi) const;
    double phase_d2(double xi) const;
    double weight(double xi) const;
    bool odd_phase() const { return kind == CurveKind::HomOdd || kind == CurveKind::Inhom35; }
};

// Fourier multiplier m(xi) e^{i t phi(xi)} tabulated on a grid.
struct Multiplier {
    std::vector<double> phase;
    std::vector<double> weight;

    static Multiplier of(const CurveSpec& c, const Grid1D& g, bool weighted);
    static Multiplier tabulate(const Grid1D& g, const std::function<double(double)>& phase,
                               const std::function<double(double)>& weight);
};

// Visit every time slice of the extension of f; the row passed to the
// callback holds space values and may be modified in place.
void for_each_slice(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg,
                    const std::function<void(int, cvec&)>& visit);
// Same for several spectra sharing one grid; rows[i] belongs to hats[i].
void for_each_slice_multi(const Multiplier& m, const std::vector<const cvec*>& hats, const SpaceTimeGrid& sg,
                          const std::function<void(int, std::vector<cvec>&)>& visit);
SpaceTimeField apply_multiplier(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg);

SpaceTimeField evolve(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg);
SpaceTimeField extend(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg);
SampledFunction extend_adjoint(const CurveSpec& curve, const SpaceTimeField& F);

// Streaming L^p norm of extend(f) without storing the field.
double extend_lp_norm(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg,
                      double p);
double multiplier_lp_norm(const Multiplier& m, const SampledFunction& f, const SpaceTimeGrid& sg,
                          double p);

SampledFunction project_halfline(const SampledFunction& f, int sign);

struct SymmetryParams {
    double h = 1.0;
    double x0 = 0.0;
    double t0 = 0.0;
};

struct ProfileParams {
    double h = 1.0;
    double x0 = 0.0;
    double xi = 0.0;
    double t0 = 0.0;
};

// building blocks, all exact on the grid
SampledFunction modulate(const SampledFunction& f, double freq);
SampledFunction rescale(const SampledFunction& f, double h); // h^{-1/2} f(x/h), h = 2^m
SampledFunction translate(const SampledFunction& f, double x0);
SampledFunction evolve_at(const CurveSpec& curve, const SampledFunction& f, double t);

SampledFunction apply_symmetry(const SymmetryParams& g, const SampledFunction& f, const CurveSpec& curve);
SampledFunction apply_profile_op(const ProfileParams& p, int sign, const SampledFunction& phi,
                                 const CurveSpec& curve);
SampledFunction invert_profile_op(const ProfileParams& p, int sign, const SampledFunction& f,
                                  const CurveSpec& curve);

Multiplier approximate_multiplier(double N, int sign, const Grid1D& g);
SpaceTimeField approximate_op(double N, int sign, const SampledFunction& f, const SpaceTimeGrid& sg);

// Warnings from operators (e.g. translation wraparound) go through here.
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& msg);

} // namespace strz
