#pragma once

#include <string>
#include <vector>

#include "strichartz/curves.hpp"
#include "strichartz/refined.hpp"

namespace strz {

enum class OrthoMode { OddHom, EvenHom, OddInhom35, EvenInhom35 };

struct ParamSequence {
    std::vector<ProfileParams> entries;
    OrthoMode mode = OrthoMode::OddHom;
    double alpha = 3.0; // exponent of the homogeneous displays
};

struct ConditionSeries {
    std::string name;
    std::vector<double> values;
    bool diverges = false;
};

struct OrthogonalityVerdict {
    bool orthogonal = false;
    int matched_case = 0; // 0 when no case applies
    std::vector<ConditionSeries> diagnostics;
};

// Divergence: final value above theta and larger than the value a third of
// the way from the end. A non-finite final value counts as divergence.
bool diverges(const std::vector<double>& v, double theta);

OrthogonalityVerdict classify_orthogonality(const ParamSequence& a, const ParamSequence& b, double theta = 1e3);

OrthoMode ortho_mode(const CurveSpec& curve);
double ortho_alpha(const CurveSpec& curve);

// Turn two single-shot parameter sets into n-indexed sequences whose
// separations grow linearly in n. Parameters within resolution (same
// scale up to sqrt 2, h |xi - xi'| < 0.25) are snapped together first.
std::pair<ParamSequence, ParamSequence> embed_parameters(const ProfileParams& a, const ProfileParams& b,
                                                         OrthoMode mode, double alpha, int length = 4096);

struct TwoProfilePair {
    ProfileParams params;
    SampledFunction phi_plus, phi_minus;
};

// T_+ phi_plus + T_- phi_minus
SampledFunction synthesize(const CurveSpec& curve, const TwoProfilePair& pair);
TwoProfilePair realify(const TwoProfilePair& pair);

struct ExtractionConfig {
    ScaleRange scales{-3, 2};
    double T = 0.5;       // argmax search window
    int n_times = 65;     // odd so that t = 0 is a node
    double bandwidth = 4.0; // profile-frame low-pass cutoff
    double theta = 1e3;
};

struct ExtractionResult {
    TwoProfilePair pair;
    SampledFunction remainder;
    bool grouped = false;
    int dominant_sign = 1;
};

ExtractionResult extract_one_pair(const CurveSpec& curve, const SampledFunction& f, const ExtractionConfig& cfg = {});

struct Decoupling {
    double l2_budget_residual = 0.0;
    std::vector<std::vector<double>> pairwise_bilinear;
    double sixth_power_gap = 0.0;
    double sixth_power_sum = 0.0;
    double remainder_strichartz = 0.0;
};

Decoupling decoupling_report(const CurveSpec& curve, const std::vector<TwoProfilePair>& pairs, const SampledFunction& f,
                             const SampledFunction& remainder, const SpaceTimeGrid& sg);

struct DecompositionConfig {
    ExtractionConfig extraction;
    double T = 0.5;     // window for Strichartz norms
    int n_times = 256;
};

struct DecompositionReport {
    std::vector<TwoProfilePair> pairs;
    std::vector<bool> grouped;
    SampledFunction remainder;
    double remainder_strichartz = 0.0;
    double initial_strichartz = 0.0;
    double l2_budget_residual = 0.0;
    std::vector<std::vector<double>> pairwise_bilinear;
    double sixth_power_gap = 0.0;
    double sixth_power_sum = 0.0;
    std::vector<double> remainder_l2; // after each extraction
    std::vector<std::vector<int>> pair_orthogonal; // matched case, 0 if not orthogonal, -1 on the diagonal
};

DecompositionReport decompose(const CurveSpec& curve, const SampledFunction& f, int J_max, double eps,
                              const DecompositionConfig& cfg = {});

} // namespace strz
