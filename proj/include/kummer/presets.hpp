#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kummer/coherent.hpp"
#include "kummer/quantum.hpp"
#include "kummer/system.hpp"

namespace kummer {

// The worked examples of the library:
//   laguerre:   l = (1, 1),  g0 = 1, h0 = x0 + x1 + hbar, rho = [[1, 1], [-1, 1]]/2
//   krawtchouk: l = (1, -1), g0 = sqrt(p(1-p)), h0 = (1-p) x0 + p x1, rho = [[1, -1], [1, 1]]/2
//   q-weyl:     l = (1), g0^2 = exprel(lambda (x0 + hbar))/exprel(lambda hbar), lambda = ln q/alpha, h0 = 0
//   three-wave: l = (1, -1, -1), g0 = 1, h0 = w0 x0 + w1 x1 + w2 x2 (spec only, no closed forms)
enum class PresetKind { Laguerre, Krawtchouk, QWeyl, ThreeWave };

PresetKind parse_preset(const std::string& name);  // accepts q-weyl and q_weyl, three-wave and three_wave
std::string preset_name(PresetKind kind);
std::vector<std::string> preset_names();

struct PresetParams {
    double hbar = 1.0;
    double p = 0.5;
    double q = 0.5;
    double alpha = 1.0;
    std::vector<double> frequencies{1.0, 0.6, 0.4};
    std::vector<int> vacuum;  // empty: the canonical vacuum of the preset
    int truncation = 0;       // 0: default_truncation()
};

// Canonical vacua: laguerre (0, 2), krawtchouk (0, 10), q-weyl (0), three-wave (0, 4, 6).
std::vector<int> canonical_vacuum(PresetKind kind);

// Throws ValidationError for p outside (0, 1), q outside (0, 1), alpha <= 0, hbar <= 0 or a wrong
// number of frequencies.
SystemSpec preset_spec(PresetKind kind, const PresetParams& params);

struct Preset {
    PresetKind kind;
    std::string name;
    PresetParams params;
    SystemSpec spec;
    Sector sector;
};

Preset build_preset(PresetKind kind, const PresetParams& params = {});
Preset build_preset(const std::string& name, const PresetParams& params = {});

// Family over hbar at a fixed classical momentum c (c_1..c_N): the vacuum at each hbar is the one whose
// momentum equals c, which requires the occupations 2 c_1/hbar to be integers. Laguerre and Krawtchouk only.
FamilyBuilder preset_family(PresetKind kind, const PresetParams& params, double c1, int truncation = 400);

struct GoldenItem {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct GoldenReport {
    std::string preset;
    std::vector<GoldenItem> items;
    bool pass = true;
};

// Closed-form comparisons of a preset: algebra relations, commutator golden values, reduced classical
// Hamiltonian, bracket triple at 10 random on-shape points, kernel and density closed forms, moments,
// coherent-state eigenvector property and (Laguerre) the Jacobi-matrix identification.
// Random points come from a generator seeded with seed.
GoldenReport golden_suite(const Preset& preset, std::uint64_t seed = 1);

} // namespace kummer
