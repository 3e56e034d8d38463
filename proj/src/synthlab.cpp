#include "textflow/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "textflow/evalkit.hpp"
#include "textflow/util.hpp"

namespace textflow {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

CurveKind curve_from_string(const std::string& s) {
    if (s == "straight") return CurveKind::straight;
    if (s == "slanted") return CurveKind::slanted;
    if (s == "sine") return CurveKind::sine;
    if (s == "arc") return CurveKind::arc;
    throw ParseError("scene spec: unknown curve kind '" + s + "'");
}

LineLayout layout_from_string(const std::string& s) {
    if (s == "stacked") return LineLayout::stacked;
    if (s == "crossing") return LineLayout::crossing;
    throw ParseError("scene spec: unknown layout '" + s + "'");
}

DistractorLaw law_from_string(const std::string& s) {
    if (s == "uniform") return DistractorLaw::uniform;
    if (s == "offline") return DistractorLaw::offline;
    if (s == "inword") return DistractorLaw::inword;
    throw ParseError("scene spec: unknown distractor law '" + s + "'");
}

ScoreMode score_mode_from_string(const std::string& s) {
    if (s == "untrained") return ScoreMode::untrained;
    if (s == "oracle") return ScoreMode::oracle;
    throw ParseError("scene spec: unknown score mode '" + s + "'");
}

void read_range(const json& j, const char* key, int& lo, int& hi) {
    if (!j.contains(key)) return;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ParseError(std::string("scene spec: ") + key + " must be [lo,hi]");
    lo = r[0].get<int>();
    hi = r[1].get<int>();
    if (lo > hi || lo < 1) throw ParseError(std::string("scene spec: empty range for ") + key);
}

void read_range(const json& j, const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ParseError(std::string("scene spec: ") + key + " must be [lo,hi]");
    lo = r[0].get<double>();
    hi = r[1].get<double>();
    if (lo > hi) throw ParseError(std::string("scene spec: empty range for ") + key);
}

}  // namespace

SceneSpec parse_scene_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scene spec: ") + e.what());
    }
    SceneSpec spec;
    if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
    if (j.contains("width")) spec.width = j["width"].get<int>();
    if (j.contains("height")) spec.height = j["height"].get<int>();
    if (j.contains("n_lines")) spec.n_lines = j["n_lines"].get<int>();
    read_range(j, "chars_per_line", spec.chars_per_line_min, spec.chars_per_line_max);
    if (j.contains("curve")) spec.curve = curve_from_string(j["curve"].get<std::string>());
    if (j.contains("layout")) spec.layout = layout_from_string(j["layout"].get<std::string>());
    if (j.contains("angle_deg")) spec.angle_deg = j["angle_deg"].get<double>();
    if (j.contains("angle_jitter_deg")) spec.angle_jitter_deg = j["angle_jitter_deg"].get<double>();
    read_range(j, "crossing_angle", spec.crossing_angle_min, spec.crossing_angle_max);
    if (j.contains("sine_amplitude")) spec.sine_amplitude = j["sine_amplitude"].get<double>();
    if (j.contains("sine_period")) spec.sine_period = j["sine_period"].get<double>();
    if (j.contains("arc_radius")) spec.arc_radius = j["arc_radius"].get<double>();
    read_range(j, "char_size", spec.char_size_min, spec.char_size_max);
    read_range(j, "char_aspect", spec.char_aspect_min, spec.char_aspect_max);
    if (j.contains("spacing_factor")) spec.spacing_factor = j["spacing_factor"].get<double>();
    if (j.contains("jitter_sigma")) spec.jitter_sigma = j["jitter_sigma"].get<double>();
    if (j.contains("distractor_count")) spec.distractor_count = j["distractor_count"].get<int>();
    if (j.contains("distractor_law"))
        spec.distractor_law = law_from_string(j["distractor_law"].get<std::string>());
    if (j.contains("offline_offset")) spec.offline_offset = j["offline_offset"].get<double>();
    if (j.contains("feature_noise_sigma"))
        spec.feature_noise_sigma = j["feature_noise_sigma"].get<double>();
    if (j.contains("score_mode"))
        spec.score_mode = score_mode_from_string(j["score_mode"].get<std::string>());
    read_range(j, "word_chars", spec.word_chars_min, spec.word_chars_max);
    if (j.contains("word_gap_factor")) spec.word_gap_factor = j["word_gap_factor"].get<double>();
    if (j.contains("quad_words")) spec.quad_words = j["quad_words"].get<bool>();
    if (j.contains("render")) spec.render = j["render"].get<bool>();
    if (spec.jitter_sigma < 0.0 || spec.feature_noise_sigma < 0.0)
        throw ParseError("scene spec: sigmas must be >= 0");
    if (spec.n_lines < 1 || spec.width < 8 || spec.height < 8)
        throw ParseError("scene spec: bad dimensions");
    return spec;
}

namespace {

struct RawChar {
    Point center;
    double w = 0.0;
    double h = 0.0;
    AABox box() const { return {center.x - w / 2, center.y - h / 2, center.x + w / 2, center.y + h / 2}; }
};

Point curve_point(const SceneSpec& spec, CurveKind kind, double angle_rad, double t) {
    const Point dir{std::cos(angle_rad), std::sin(angle_rad)};
    const Point perp{-dir.y, dir.x};
    switch (kind) {
        case CurveKind::straight:
        case CurveKind::slanted:
            return t * dir;
        case CurveKind::sine: {
            const double off = spec.sine_amplitude * std::sin(2.0 * kPi * t / spec.sine_period);
            return t * dir + off * perp;
        }
        case CurveKind::arc: {
            const double phi = t / spec.arc_radius;
            // Circle tangent to the baseline direction at t = 0.
            const Point rel{spec.arc_radius * std::sin(phi),
                            spec.arc_radius * (1.0 - std::cos(phi))};
            return rel.x * dir + rel.y * perp;
        }
    }
    return {0.0, 0.0};
}

void draw_ellipse(RasterImage& img, const AABox& box, uint8_t value) {
    const Point c = box.center();
    const double rx = std::max(0.5, box.width() / 2.0);
    const double ry = std::max(0.5, box.height() / 2.0);
    const int y0 = std::max(0, static_cast<int>(std::floor(box.ymin)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(box.ymax)));
    const int x0 = std::max(0, static_cast<int>(std::floor(box.xmin)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(box.xmax)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x + 0.5 - c.x) / rx;
            const double dy = (y + 0.5 - c.y) / ry;
            if (dx * dx + dy * dy <= 1.0) img.set(x, y, value);
        }
    }
}

}  // namespace

GeneratedScene generate_scene(const SceneSpec& spec) {
    Rng rng(spec.seed);
    GeneratedScene out;
    Scene& scene = out.scene;

    struct LinePlan {
        std::vector<RawChar> chars;
        std::vector<std::vector<int>> word_members;  // local char indices
    };

    const double margin = spec.char_size_max;
    std::vector<LinePlan> plans;
    for (int li = 0; li < spec.n_lines; ++li) {
        LinePlan plan;
        const int n_chars = rng.uniform_int(spec.chars_per_line_min, spec.chars_per_line_max);
        double angle = spec.angle_deg;
        if (spec.angle_jitter_deg > 0.0)
            angle += rng.uniform(-spec.angle_jitter_deg, spec.angle_jitter_deg);
        if (spec.layout == LineLayout::crossing && li > 0)
            angle += rng.uniform(spec.crossing_angle_min, spec.crossing_angle_max);
        const double angle_rad = angle * kPi / 180.0;
        const double base_size = rng.uniform(spec.char_size_min, spec.char_size_max);
        const double spacing = spec.spacing_factor * base_size;

        // Word sizes first, then chars along the curve with word gaps.
        std::vector<int> word_sizes;
        int remaining = n_chars;
        while (remaining > 0) {
            int w = rng.uniform_int(spec.word_chars_min, spec.word_chars_max);
            w = std::min(w, remaining);
            word_sizes.push_back(w);
            remaining -= w;
        }

        double t = 0.0;
        int local_index = 0;
        for (size_t wi = 0; wi < word_sizes.size(); ++wi) {
            plan.word_members.emplace_back();
            for (int ci = 0; ci < word_sizes[wi]; ++ci) {
                RawChar ch;
                ch.center = curve_point(spec, spec.curve, angle_rad, t);
                const double size = base_size * rng.uniform(0.92, 1.08);
                ch.h = size;
                ch.w = size * rng.uniform(spec.char_aspect_min, spec.char_aspect_max);
                plan.chars.push_back(ch);
                plan.word_members.back().push_back(local_index++);
                t += spacing;
            }
            t += (spec.word_gap_factor - 1.0) * spacing;
        }

        // Place the line inside the image: relative coordinates so far.
        AABox extent;
        {
            std::vector<Point> pts;
            for (const RawChar& ch : plan.chars) {
                const AABox b = ch.box();
                pts.push_back({b.xmin, b.ymin});
                pts.push_back({b.xmax, b.ymax});
            }
            extent = bounding_box(pts);
        }
        Point shift;
        if (spec.layout == LineLayout::crossing) {
            const Point mid = extent.center();
            shift = Point{spec.width / 2.0 - mid.x + rng.uniform(-8.0, 8.0),
                          spec.height / 2.0 - mid.y + rng.uniform(-8.0, 8.0)};
        } else {
            const double band = static_cast<double>(spec.height) / spec.n_lines;
            const double cy = band * (li + 0.5);
            const double x_play =
                std::max(0.0, spec.width - 2.0 * margin - extent.width());
            shift = Point{margin - extent.xmin + rng.uniform(0.0, x_play),
                          cy - extent.center().y};
        }
        for (RawChar& ch : plan.chars) ch.center = ch.center + shift;
        plans.push_back(std::move(plan));
    }

    // Ground truth: chars, lines, words.
    for (const LinePlan& plan : plans) {
        LineTruth line;
        const int base = static_cast<int>(scene.gt_chars.size());
        for (size_t i = 0; i < plan.chars.size(); ++i) {
            scene.gt_chars.push_back(plan.chars[i].box());
            line.char_indices.push_back(base + static_cast<int>(i));
        }
        scene.gt_lines.push_back(std::move(line));
        for (const auto& members : plan.word_members) {
            WordAnnotation anno;
            if (spec.quad_words) {
                std::vector<Point> corners;
                for (int m : members)
                    for (const Point& p : plan.chars[m].box().corners()) corners.push_back(p);
                anno.region = min_area_rect(corners);
            } else {
                std::vector<Point> pts;
                for (int m : members) {
                    const AABox b = plan.chars[m].box();
                    pts.push_back({b.xmin, b.ymin});
                    pts.push_back({b.xmax, b.ymax});
                }
                anno.region = bounding_box(pts);
            }
            anno.char_count = static_cast<int>(members.size());
            scene.words.push_back(std::move(anno));
        }
    }

    // Candidates: jittered ground truth plus distractors, with latent
    // feature channels [aspect, diag/32, jitter magnitude/8, a1, a2].
    const ScorerState untrained;
    int next_id = 0;
    auto push_candidate = [&](const AABox& box, double jitter_mag, bool is_text, int src) {
        CharCandidate cand;
        cand.box = box;
        cand.id = next_id++;
        cand.src = src;
        const double aspect = box.height() > 0.0 ? box.width() / box.height() : 1.0;
        const double mu1 = is_text ? 1.0 : -1.0;
        const double mu2 = is_text ? 0.5 : -0.5;
        cand.features = {aspect, box.diagonal() / 32.0, jitter_mag / 8.0,
                         rng.normal(mu1, spec.feature_noise_sigma),
                         rng.normal(mu2, spec.feature_noise_sigma)};
        if (spec.score_mode == ScoreMode::oracle) {
            cand.score = std::clamp(rng.normal(is_text ? 0.92 : 0.15, is_text ? 0.04 : 0.08),
                                    0.001, 0.999);
        } else {
            cand.score = untrained.score(cand.features);
        }
        scene.candidates.push_back(std::move(cand));
    };

    for (size_t gi = 0; gi < scene.gt_chars.size(); ++gi) {
        const AABox& g = scene.gt_chars[gi];
        const Point offset{rng.normal(0.0, spec.jitter_sigma), rng.normal(0.0, spec.jitter_sigma)};
        // Size noise rides the same knob so jitter 0 reproduces gt exactly.
        const double grow = std::max(0.6, 1.0 + 0.03 * spec.jitter_sigma * rng.normal());
        const Point c = g.center() + offset;
        const double w = g.width() * grow;
        const double h = g.height() * grow;
        push_candidate({c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2}, norm(offset), true,
                       static_cast<int>(gi));
    }

    for (int d = 0; d < spec.distractor_count; ++d) {
        double size = rng.uniform(spec.char_size_min, spec.char_size_max);
        Point c;
        if (spec.distractor_law == DistractorLaw::inword && !scene.words.empty()) {
            const int wi = rng.uniform_int(0, static_cast<int>(scene.words.size()) - 1);
            const AABox wb = scene.words[wi].bounds();
            c = {rng.uniform(wb.xmin, wb.xmax), rng.uniform(wb.ymin, wb.ymax)};
            size = wb.height() * rng.uniform(0.8, 1.0);
        } else if (spec.distractor_law == DistractorLaw::offline && !scene.gt_lines.empty()) {
            // Perpendicular offset from a random ground-truth char.
            const int line = rng.uniform_int(0, static_cast<int>(scene.gt_lines.size()) - 1);
            const LineTruth& lt = scene.gt_lines[line];
            const int pick =
                lt.char_indices[rng.uniform_int(0, static_cast<int>(lt.char_indices.size()) - 1)];
            const AABox& ref = scene.gt_chars[pick];
            Point dir{0.0, 1.0};
            if (lt.char_indices.size() >= 2) {
                const Point a = scene.gt_chars[lt.char_indices.front()].center();
                const Point b = scene.gt_chars[lt.char_indices.back()].center();
                const double len = distance(a, b);
                if (len > 0.0) dir = {-(b.y - a.y) / len, (b.x - a.x) / len};
            }
            const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
            c = ref.center() + (side * spec.offline_offset * size) * dir;
        } else {
            c = {rng.uniform(margin, spec.width - margin), rng.uniform(margin, spec.height - margin)};
        }
        const double w = size * rng.uniform(spec.char_aspect_min, spec.char_aspect_max);
        const double jm = rng.uniform(0.0, 3.0 * spec.jitter_sigma + 1.0);
        push_candidate({c.x - w / 2, c.y - size / 2, c.x + w / 2, c.y + size / 2}, jm, false, -1);
    }

    if (spec.render) {
        RasterImage img(spec.width, spec.height, 0);
        for (const AABox& g : scene.gt_chars) draw_ellipse(img, g, 255);
        out.image = std::move(img);
    }
    return out;
}

double ScorerState::score(const std::vector<double>& features) const {
    double z = bias;
    for (size_t i = 0; i < weights.size() && i < features.size(); ++i)
        z += weights[i] * features[i];
    return 1.0 / (1.0 + std::exp(-z));
}

SimReport simulate_weak_training(const std::vector<Scene>& scenes, ScorerState& scorer,
                                 int iters, const MaskScoreParams& mask_params, int jobs) {
    SimReport report;
    if (scenes.empty()) return report;
    const size_t feature_dim = scenes[0].candidates.empty() ? 0 : scenes[0].candidates[0].features.size();
    if (scorer.weights.empty()) scorer.weights.assign(feature_dim, 0.0);

    struct SceneState {
        std::vector<CharCandidate> cands;  // rescored copies
        std::vector<CharMask> masks;
        size_t matched = 0;
        size_t n_preds = 0;
    };
    std::vector<SceneState> states(scenes.size());
    for (size_t i = 0; i < scenes.size(); ++i) states[i].cands = scenes[i].candidates;

    for (int it = 0; it <= iters; ++it) {
        parallel_for(scenes.size(), jobs, [&](size_t si) {
            SceneState& st = states[si];
            for (CharCandidate& c : st.cands) c.score = scorer.score(c.features);
            Scene working = scenes[si];
            working.candidates = st.cands;
            st.masks = generate_masks(working, mask_params);

            std::set<int> selected;
            for (const CharMask& m : st.masks)
                for (int id : m.selected_ids) selected.insert(id);
            std::vector<ScoredBox> preds;
            for (const CharCandidate& c : st.cands)
                if (selected.count(c.id)) preds.push_back({c.box, c.score, c.id});
            const MatchResult mr = match_boxes(preds, scenes[si].gt_chars, 0.5);
            st.matched = mr.matches.size();
            st.n_preds = preds.size();
        });

        size_t matched = 0, n_preds = 0, n_gts = 0, n_words = 0;
        double sum_s = 0.0;
        for (size_t si = 0; si < scenes.size(); ++si) {
            matched += states[si].matched;
            n_preds += states[si].n_preds;
            n_gts += scenes[si].gt_chars.size();
            for (const CharMask& m : states[si].masks) {
                sum_s += m.s;
                ++n_words;
            }
        }
        const PRF p = prf_from_counts(matched, n_preds, n_gts);
        report.rows.push_back({it, p.f_measure, n_words > 0 ? sum_s / n_words : 0.0});
        if (it == iters) break;

        // One weighted logistic step: selected candidates positive,
        // unselected in-word candidates negative, per-word weight = s.
        std::vector<double> grad(scorer.weights.size(), 0.0);
        double grad_bias = 0.0;
        double weight_total = 0.0;
        for (size_t si = 0; si < scenes.size(); ++si) {
            const SceneState& st = states[si];
            for (const CharMask& m : st.masks) {
                const double s = loss_weight(m);
                if (s <= 0.0) continue;
                const WordAnnotation& word = scenes[si].words[m.word_index];
                const std::set<int> sel(m.selected_ids.begin(), m.selected_ids.end());
                for (const CharCandidate& c : st.cands) {
                    if (!word.contains(c.center())) continue;
                    const double y = sel.count(c.id) ? 1.0 : 0.0;
                    const double g = s * (scorer.score(c.features) - y);
                    for (size_t f = 0; f < grad.size() && f < c.features.size(); ++f)
                        grad[f] += g * c.features[f];
                    grad_bias += g;
                    weight_total += s;
                }
            }
        }
        if (weight_total > 0.0) {
            for (size_t f = 0; f < grad.size(); ++f)
                scorer.weights[f] -= scorer.learning_rate * grad[f] / weight_total;
            scorer.bias -= scorer.learning_rate * grad_bias / weight_total;
        }
        ++scorer.iteration;
    }
    return report;
}

std::string report_to_csv(const SimReport& report) {
    std::string out = "iteration,f1,mean_s\n";
    char buf[96];
    for (const SimIterationRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", r.iteration, r.f1, r.mean_s);
        out += buf;
    }
    return out;
}

}  // namespace textflow
