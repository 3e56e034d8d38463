#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "textflow/ingest.hpp"
#include "textflow/maskgen.hpp"
#include "textflow/raster.hpp"

namespace textflow {

enum class CurveKind { straight, slanted, sine, arc };
enum class LineLayout { stacked, crossing };
enum class DistractorLaw { uniform, offline, inword };

/// untrained: all candidate scores from the zero-weight scorer (0.5).
/// oracle: detector-like scores, high for chars and low for distractors.
enum class ScoreMode { untrained, oracle };

/// Parameters of a synthetic scene. Everything downstream of the seed is
/// deterministic.
struct SceneSpec {
    uint64_t seed = 1;
    int width = 640;
    int height = 360;
    int n_lines = 2;
    int chars_per_line_min = 5;
    int chars_per_line_max = 9;
    CurveKind curve = CurveKind::straight;
    LineLayout layout = LineLayout::stacked;
    double angle_deg = 0.0;
    double angle_jitter_deg = 0.0;
    double crossing_angle_min = 60.0;  // crossing layout: offset of line i > 0
    double crossing_angle_max = 90.0;
    double sine_amplitude = 0.0;
    double sine_period = 140.0;
    double arc_radius = 220.0;
    double char_size_min = 18.0;
    double char_size_max = 26.0;
    double char_aspect_min = 0.50;  // box width as fraction of height
    double char_aspect_max = 0.65;
    double spacing_factor = 0.7;   // center advance as multiple of char size
    double jitter_sigma = 0.8;     // candidate center noise, pixels
    int distractor_count = 4;
    DistractorLaw distractor_law = DistractorLaw::uniform;
    double offline_offset = 2.0;   // perpendicular offset in char sizes
    double feature_noise_sigma = 0.8;
    ScoreMode score_mode = ScoreMode::untrained;
    int word_chars_min = 2;
    int word_chars_max = 5;
    double word_gap_factor = 2.0;  // inter-word advance as multiple of spacing
    bool quad_words = false;
    bool render = false;
};

SceneSpec parse_scene_spec(const std::string& json_text);

struct GeneratedScene {
    Scene scene;
    std::optional<RasterImage> image;
};

/// Ground-truth chars with word/line structure, jittered candidates with
/// latent feature channels, distractors, and optionally a rendered raster.
GeneratedScene generate_scene(const SceneSpec& spec);

/// Logistic scorer over candidate features; the stand-in for the character
/// model in the alternating training loop. Empty weights score 0.5.
struct ScorerState {
    std::vector<double> weights;
    double bias = 0.0;
    double learning_rate = 0.5;
    int iteration = 0;

    double score(const std::vector<double>& features) const;
};

struct SimIterationRow {
    int iteration = 0;
    double f1 = 0.0;      // selected candidates vs ground-truth chars, IoU 0.5
    double mean_s = 0.0;  // mean selection score over all words
};

struct SimReport {
    std::vector<SimIterationRow> rows;
};

/// Alternating loop: score candidates, generate masks, turn them into
/// weighted labels (selected positive, unselected in-word negative, word
/// weight = selection score), take one weighted logistic step. Records
/// iters + 1 rows, iteration 0 being the untouched scorer.
SimReport simulate_weak_training(const std::vector<Scene>& scenes, ScorerState& scorer,
                                 int iters, const MaskScoreParams& mask_params, int jobs = 1);

std::string report_to_csv(const SimReport& report);

}  // namespace textflow
