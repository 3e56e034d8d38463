// textflow: character-level text structure analysis toolkit.
//
// Subcommands cover synthetic scene generation, word-supervised character
// mask generation, the weak-supervision training simulator, character
// grouping, line model fitting, strip rectification, word partition, and
// detection evaluation. `pipeline` chains group -> fitline -> rectify ->
// partition -> eval over a scene directory.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "textflow/evalkit.hpp"
#include "textflow/grouping.hpp"
#include "textflow/ingest.hpp"
#include "textflow/lineshape.hpp"
#include "textflow/maskgen.hpp"
#include "textflow/rectify.hpp"
#include "textflow/synthlab.hpp"
#include "textflow/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace textflow;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<fs::path> list_scene_files(const std::string& scenes_arg) {
    const fs::path p(scenes_arg);
    if (!fs::exists(p)) throw std::runtime_error(scenes_arg + ": no such file or directory");
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.path().extension() == ".json" &&
                entry.path().filename().string().rfind("scene_", 0) == 0)
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw std::runtime_error(scenes_arg + ": no scene_*.json files");
    } else {
        files.push_back(p);
    }
    return files;
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!cfg.is_object()) throw std::runtime_error(path + ": config must be an object");
    return cfg;
}

template <typename T>
void config_get(const json& cfg, const char* section, const char* key, T& value) {
    if (cfg.contains(section) && cfg[section].contains(key))
        value = cfg[section][key].get<T>();
}

RasterImage load_scene_image(const fs::path& scene_file, const Scene& scene) {
    if (!scene.image_path)
        throw std::runtime_error(scene_file.string() + ": scene has no image");
    fs::path img(*scene.image_path);
    if (img.is_relative()) img = scene_file.parent_path() / img;
    return read_pgm(img.string());
}

std::string stem_of(const fs::path& scene_file) { return scene_file.stem().string(); }

// ----- per-stage document parsing -------------------------------------------

struct GroupDoc {
    std::vector<std::vector<int>> groups;  // char id chains
};

GroupDoc parse_groups_doc(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    GroupDoc out;
    for (const json& g : doc.at("groups"))
        out.groups.push_back(g.at("char_ids").get<std::vector<int>>());
    return out;
}

struct LineDoc {
    LineModel model;
    TextPolygon polygon;
    std::vector<int> char_ids;
};

std::vector<LineDoc> parse_lines_doc(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    std::vector<LineDoc> out;
    for (const json& entry : doc) {
        LineDoc ld;
        const std::string kind = entry.at("kind").get<std::string>();
        if (kind == "order0") ld.model.kind = LineModelKind::order0;
        else if (kind == "order1") ld.model.kind = LineModelKind::order1;
        else if (kind == "piecewise") ld.model.kind = LineModelKind::piecewise;
        else throw std::runtime_error(path.string() + ": unknown model kind " + kind);
        for (const json& l : entry.at("lines"))
            ld.model.lines.push_back({l[0].get<double>(), l[1].get<double>(), l[2].get<double>()});
        ld.model.height = entry.at("h").get<double>();
        for (const json& p : entry.at("polygon"))
            ld.polygon.points.push_back({p[0].get<double>(), p[1].get<double>()});
        ld.polygon.self_intersecting = entry.value("self_intersecting", false);
        ld.char_ids = entry.at("char_ids").get<std::vector<int>>();
        out.push_back(std::move(ld));
    }
    return out;
}

std::vector<CharCandidate> chars_by_ids(const Scene& scene, const std::vector<int>& ids,
                                        const std::string& where) {
    std::map<int, const CharCandidate*> by_id;
    for (const CharCandidate& c : scene.candidates) by_id[c.id] = &c;
    std::vector<CharCandidate> out;
    out.reserve(ids.size());
    for (int id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::runtime_error(where + ": unknown candidate id " + std::to_string(id));
        out.push_back(*it->second);
    }
    return out;
}

// ----- stages ---------------------------------------------------------------

struct StageParams {
    MaskScoreParams mask;
    GroupingParams grouping;
    PartitionParams partition;
    double eval_iou = 0.5;
    int sim_iters = 30;
    double sim_lr = 0.5;
    int jobs = 1;
};

void stage_maskgen(const std::vector<fs::path>& scene_files, const fs::path& out_dir,
                   const StageParams& params) {
    std::vector<std::string> docs(scene_files.size());
    std::vector<Scene> scenes(scene_files.size());
    for (size_t i = 0; i < scene_files.size(); ++i) scenes[i] = load_scene(scene_files[i].string());
    parallel_for(scene_files.size(), params.jobs, [&](size_t i) {
        docs[i] = masks_to_json(generate_masks(scenes[i], params.mask));
    });
    for (size_t i = 0; i < scene_files.size(); ++i)
        write_file(out_dir / ("masks_" + stem_of(scene_files[i]) + ".json"), docs[i]);
}

void stage_group(const std::vector<fs::path>& scene_files, const fs::path& out_dir,
                 const StageParams& params) {
    std::vector<std::string> docs(scene_files.size());
    std::vector<Scene> scenes(scene_files.size());
    for (size_t i = 0; i < scene_files.size(); ++i) scenes[i] = load_scene(scene_files[i].string());
    parallel_for(scene_files.size(), params.jobs, [&](size_t i) {
        docs[i] = groups_to_json(extract_groups(scenes[i].candidates, params.grouping));
    });
    for (size_t i = 0; i < scene_files.size(); ++i)
        write_file(out_dir / ("groups_" + stem_of(scene_files[i]) + ".json"), docs[i]);
}

void stage_fitline(const std::vector<fs::path>& scene_files, const fs::path& groups_dir,
                   const fs::path& out_dir, const StageParams& params) {
    std::vector<std::string> docs(scene_files.size());
    std::vector<Scene> scenes(scene_files.size());
    std::vector<GroupDoc> groups(scene_files.size());
    for (size_t i = 0; i < scene_files.size(); ++i) {
        scenes[i] = load_scene(scene_files[i].string());
        groups[i] = parse_groups_doc(groups_dir / ("groups_" + stem_of(scene_files[i]) + ".json"));
    }
    parallel_for(scene_files.size(), params.jobs, [&](size_t i) {
        std::vector<LineModel> models;
        std::vector<TextPolygon> polygons;
        std::vector<std::vector<int>> char_ids;
        for (const std::vector<int>& chain : groups[i].groups) {
            const std::vector<CharCandidate> chars =
                chars_by_ids(scenes[i], chain, scene_files[i].string());
            const ModelSelection sel = select_model(chars);
            models.push_back(sel.chosen);
            polygons.push_back(text_polygon(chars, sel.chosen));
            char_ids.push_back(chain);
        }
        docs[i] = lines_to_json(models, polygons, char_ids);
    });
    for (size_t i = 0; i < scene_files.size(); ++i)
        write_file(out_dir / ("lines_" + stem_of(scene_files[i]) + ".json"), docs[i]);
}

void stage_rectify(const std::vector<fs::path>& scene_files, const fs::path& lines_dir,
                   const fs::path& out_dir, const StageParams& params) {
    std::vector<Scene> scenes(scene_files.size());
    std::vector<RasterImage> images(scene_files.size());
    std::vector<std::vector<LineDoc>> lines(scene_files.size());
    for (size_t i = 0; i < scene_files.size(); ++i) {
        scenes[i] = load_scene(scene_files[i].string());
        images[i] = load_scene_image(scene_files[i], scenes[i]);
        lines[i] = parse_lines_doc(lines_dir / ("lines_" + stem_of(scene_files[i]) + ".json"));
    }
    std::vector<std::vector<RasterImage>> strips(scene_files.size());
    parallel_for(scene_files.size(), params.jobs, [&](size_t i) {
        for (const LineDoc& ld : lines[i])
            strips[i].push_back(rectify_strip(images[i], ld.polygon, ld.model).raster);
    });
    for (size_t i = 0; i < scene_files.size(); ++i) {
        for (size_t g = 0; g < strips[i].size(); ++g) {
            const fs::path name =
                out_dir / (stem_of(scene_files[i]) + "_" + std::to_string(g) + ".pgm");
            write_pgm(strips[i][g], name.string());
        }
    }
}

void stage_partition(const std::vector<fs::path>& scene_files, const fs::path& lines_dir,
                     const fs::path& out_dir, const StageParams& params) {
    std::vector<Scene> scenes(scene_files.size());
    std::vector<RasterImage> images(scene_files.size());
    std::vector<std::vector<LineDoc>> lines(scene_files.size());
    for (size_t i = 0; i < scene_files.size(); ++i) {
        scenes[i] = load_scene(scene_files[i].string());
        images[i] = load_scene_image(scene_files[i], scenes[i]);
        lines[i] = parse_lines_doc(lines_dir / ("lines_" + stem_of(scene_files[i]) + ".json"));
    }
    std::vector<std::string> docs(scene_files.size());
    parallel_for(scene_files.size(), params.jobs, [&](size_t i) {
        std::vector<WordPartition> parts;
        std::vector<int> group_ids;
        for (size_t g = 0; g < lines[i].size(); ++g) {
            const RectifiedStrip strip =
                rectify_strip(images[i], lines[i][g].polygon, lines[i][g].model);
            parts.push_back(partition_words(strip, params.partition));
            group_ids.push_back(static_cast<int>(g));
        }
        docs[i] = partition_to_json(parts, group_ids);
    });
    for (size_t i = 0; i < scene_files.size(); ++i)
        write_file(out_dir / ("partition_" + stem_of(scene_files[i]) + ".json"), docs[i]);
}

/// Word predictions of one scene from its partition + lines docs: each word
/// quad becomes a box scored by the mean score of its group's chars.
std::vector<ScoredBox> partition_word_preds(const Scene& scene, const std::vector<LineDoc>& lines,
                                            const fs::path& partition_file) {
    json doc;
    try {
        doc = json::parse(read_file(partition_file));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(partition_file.string() + ": " + e.what());
    }
    std::vector<ScoredBox> preds;
    int next_id = 0;
    for (const json& entry : doc) {
        const int gid = entry.at("group_id").get<int>();
        const std::vector<CharCandidate> chars =
            chars_by_ids(scene, lines.at(gid).char_ids, partition_file.string());
        double mean_score = 0.0;
        for (const CharCandidate& c : chars) mean_score += c.score;
        if (!chars.empty()) mean_score /= static_cast<double>(chars.size());
        for (const json& quad : entry.at("word_quads")) {
            std::vector<Point> pts;
            for (const json& p : quad) pts.push_back({p[0].get<double>(), p[1].get<double>()});
            preds.push_back({bounding_box(pts), mean_score, next_id++});
        }
    }
    return preds;
}

void stage_eval_pipeline(const std::vector<fs::path>& scene_files, const fs::path& artifacts_dir,
                         const fs::path& out_dir, const StageParams& params) {
    std::vector<EvalRow> rows;
    size_t matched = 0, n_preds = 0, n_gts = 0;
    for (const fs::path& scene_file : scene_files) {
        const Scene scene = load_scene(scene_file.string());
        const std::vector<LineDoc> lines =
            parse_lines_doc(artifacts_dir / ("lines_" + stem_of(scene_file) + ".json"));
        const std::vector<ScoredBox> preds = partition_word_preds(
            scene, lines, artifacts_dir / ("partition_" + stem_of(scene_file) + ".json"));
        std::vector<AABox> gts;
        for (const WordAnnotation& w : scene.words) gts.push_back(w.bounds());
        const MatchResult mr = match_boxes(preds, gts, params.eval_iou);
        rows.push_back({stem_of(scene_file), prf(mr)});
        matched += mr.matches.size();
        n_preds += preds.size();
        n_gts += gts.size();
    }
    write_file(out_dir / "eval.csv", eval_to_csv(rows, prf_from_counts(matched, n_preds, n_gts)));
}

// ----- eval document loading (standalone eval command) ----------------------

std::vector<ScoredBox> load_pred_boxes(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    std::vector<ScoredBox> out;
    const char* key = doc.contains("candidates") ? "candidates" : "boxes";
    if (!doc.contains(key)) throw std::runtime_error(path.string() + ": no candidates/boxes");
    int next_id = 0;
    for (const json& b : doc[key]) {
        ScoredBox sb;
        const json& arr = b.is_object() ? b.at("box") : b;
        sb.box = {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                  arr[3].get<double>()};
        sb.score = b.is_object() ? b.value("score", 1.0) : 1.0;
        sb.id = b.is_object() && b.contains("id") ? b["id"].get<int>() : next_id;
        ++next_id;
        out.push_back(sb);
    }
    return out;
}

std::vector<AABox> load_gt_boxes(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    std::vector<AABox> out;
    const char* key = nullptr;
    for (const char* k : {"gt_chars", "boxes", "candidates"})
        if (doc.contains(k)) {
            key = k;
            break;
        }
    if (!key) throw std::runtime_error(path.string() + ": no gt_chars/boxes/candidates");
    for (const json& b : doc[key]) {
        const json& arr = b.is_object() ? b.at("box") : b;
        out.push_back({arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                       arr[3].get<double>()});
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"textflow: character-based text structure analysis"};
    app.require_subcommand(1);

    std::string config_path, scenes_arg, out_arg, preds_arg, gt_arg, groups_arg, lines_arg;
    int jobs = 1;
    uint64_t seed = 0;
    bool seed_set = false;
    int count = 0;
    bool count_set = false;

    StageParams params;
    // Flag presence is tracked so that flags override config values.
    struct Overrides {
        std::map<std::string, double> d;
        std::map<std::string, int> i;
    } ov;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON configuration file");
        cmd->add_option("--out", out_arg, "output directory")->required();
        cmd->add_option("--jobs", jobs, "worker threads (output is identical for any value)");
    };
    auto add_double = [&](CLI::App* cmd, const char* flag, const char* key, const char* help) {
        cmd->add_option_function<double>(
               flag, [&ov, key](double v) { ov.d[key] = v; }, help);
    };
    auto add_int = [&](CLI::App* cmd, const char* flag, const char* key, const char* help) {
        cmd->add_option_function<int>(
               flag, [&ov, key](int v) { ov.i[key] = v; }, help);
    };

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic scenes");
    add_common(synth);
    synth->add_option("--seed", seed, "base seed (scene i uses seed + i)")
        ->each([&](const std::string&) { seed_set = true; });
    synth->add_option("--count", count, "number of scenes")
        ->each([&](const std::string&) { count_set = true; });

    CLI::App* maskgen_cmd = app.add_subcommand("maskgen", "word-supervised character masks");
    add_common(maskgen_cmd);
    maskgen_cmd->add_option("--scenes", scenes_arg, "scene file or directory")->required();
    add_double(maskgen_cmd, "--w", "w", "coverage/collinearity balance");
    add_double(maskgen_cmd, "--count-term", "count_term_weight", "char-count penalty weight");
    add_int(maskgen_cmd, "--knn-k", "knn_k", "k for the character graph");
    add_double(maskgen_cmd, "--score-floor", "mask_score_floor", "candidate admission floor");

    CLI::App* simulate = app.add_subcommand("simulate", "weak-supervision training loop");
    add_common(simulate);
    simulate->add_option("--scenes", scenes_arg, "scene directory")->required();
    add_int(simulate, "--iters", "iters", "training iterations");
    add_double(simulate, "--lr", "learning_rate", "scorer learning rate");
    add_double(simulate, "--w", "w", "coverage/collinearity balance");
    add_int(simulate, "--knn-k", "knn_k", "k for the character graph");
    add_double(simulate, "--score-floor", "mask_score_floor", "candidate admission floor");

    CLI::App* group = app.add_subcommand("group", "character grouping into lines");
    add_common(group);
    group->add_option("--scenes", scenes_arg, "scene file or directory")->required();
    add_double(group, "--alpha", "alpha", "score weight in unary cost");
    add_double(group, "--beta", "beta", "distance weight in unary cost");
    add_double(group, "--entry-exit", "entry_exit_cost", "path entry/exit cost");
    add_double(group, "--score-floor", "group_score_floor", "char admission floor");
    add_int(group, "--knn-k", "group_k", "k for pair construction");

    CLI::App* fitline = app.add_subcommand("fitline", "line model fitting + text polygons");
    add_common(fitline);
    fitline->add_option("--scenes", scenes_arg, "scene file or directory")->required();
    fitline->add_option("--groups", groups_arg, "directory with groups_*.json")->required();

    CLI::App* rectify_cmd = app.add_subcommand("rectify", "TPS strip rectification");
    add_common(rectify_cmd);
    rectify_cmd->add_option("--scenes", scenes_arg, "scene file or directory")->required();
    rectify_cmd->add_option("--lines", lines_arg, "directory with lines_*.json")->required();

    CLI::App* partition = app.add_subcommand("partition", "word partition on rectified strips");
    add_common(partition);
    partition->add_option("--scenes", scenes_arg, "scene file or directory")->required();
    partition->add_option("--lines", lines_arg, "directory with lines_*.json")->required();
    add_double(partition, "--min-gap-frac", "min_gap_frac", "min separator run / strip height");
    add_double(partition, "--density-threshold", "density_threshold", "ink threshold fraction");

    CLI::App* eval = app.add_subcommand("eval", "precision/recall/F at an IoU threshold");
    add_common(eval);
    eval->add_option("--preds", preds_arg, "predictions document")->required();
    eval->add_option("--gt", gt_arg, "ground-truth document")->required();
    add_double(eval, "--iou", "iou", "match threshold");

    CLI::App* pipeline = app.add_subcommand("pipeline", "group -> fitline -> rectify -> partition -> eval");
    add_common(pipeline);
    pipeline->add_option("--scenes", scenes_arg, "scene directory")->required();
    add_double(pipeline, "--alpha", "alpha", "score weight in unary cost");
    add_double(pipeline, "--beta", "beta", "distance weight in unary cost");
    add_double(pipeline, "--entry-exit", "entry_exit_cost", "path entry/exit cost");
    add_double(pipeline, "--score-floor", "group_score_floor", "char admission floor");
    add_int(pipeline, "--knn-k", "group_k", "k for pair construction");
    add_double(pipeline, "--min-gap-frac", "min_gap_frac", "min separator run / strip height");
    add_double(pipeline, "--density-threshold", "density_threshold", "ink threshold fraction");
    add_double(pipeline, "--iou", "iou", "match threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);

        // Defaults <- config <- flags.
        config_get(cfg, "mask", "w", params.mask.w);
        config_get(cfg, "mask", "count_term_weight", params.mask.count_term_weight);
        config_get(cfg, "mask", "knn_k", params.mask.knn_k);
        config_get(cfg, "mask", "score_floor", params.mask.score_floor);
        config_get(cfg, "grouping", "alpha", params.grouping.alpha);
        config_get(cfg, "grouping", "beta", params.grouping.beta);
        config_get(cfg, "grouping", "entry_exit_cost", params.grouping.entry_exit_cost);
        config_get(cfg, "grouping", "score_floor", params.grouping.score_floor);
        config_get(cfg, "grouping", "k", params.grouping.k);
        config_get(cfg, "grouping", "literal_cos_pairwise", params.grouping.literal_cos_pairwise);
        config_get(cfg, "rectify", "min_gap_frac", params.partition.min_gap_frac);
        config_get(cfg, "rectify", "density_threshold", params.partition.density_threshold);
        config_get(cfg, "eval", "iou", params.eval_iou);
        config_get(cfg, "simulate", "iters", params.sim_iters);
        config_get(cfg, "simulate", "learning_rate", params.sim_lr);

        auto ov_d = [&](const char* key, double& target) {
            auto it = ov.d.find(key);
            if (it != ov.d.end()) target = it->second;
        };
        auto ov_i = [&](const char* key, int& target) {
            auto it = ov.i.find(key);
            if (it != ov.i.end()) target = it->second;
        };
        ov_d("w", params.mask.w);
        ov_d("count_term_weight", params.mask.count_term_weight);
        ov_i("knn_k", params.mask.knn_k);
        ov_d("mask_score_floor", params.mask.score_floor);
        ov_d("alpha", params.grouping.alpha);
        ov_d("beta", params.grouping.beta);
        ov_d("entry_exit_cost", params.grouping.entry_exit_cost);
        ov_d("group_score_floor", params.grouping.score_floor);
        ov_i("group_k", params.grouping.k);
        ov_d("min_gap_frac", params.partition.min_gap_frac);
        ov_d("density_threshold", params.partition.density_threshold);
        ov_d("iou", params.eval_iou);
        ov_i("iters", params.sim_iters);
        ov_d("learning_rate", params.sim_lr);
        params.jobs = jobs;

        const fs::path out_dir(out_arg);

        if (synth->parsed()) {
            SceneSpec base_spec;
            int n_scenes = 1;
            if (cfg.contains("synth")) {
                base_spec = parse_scene_spec(cfg["synth"].dump());
                n_scenes = cfg["synth"].value("count", 1);
            }
            if (seed_set) base_spec.seed = seed;
            if (count_set) n_scenes = count;
            fs::create_directories(out_dir);
            std::vector<GeneratedScene> generated(n_scenes);
            parallel_for(static_cast<size_t>(n_scenes), params.jobs, [&](size_t i) {
                SceneSpec spec = base_spec;
                spec.seed = base_spec.seed + i;
                generated[i] = generate_scene(spec);
            });
            for (int i = 0; i < n_scenes; ++i) {
                char name[64];
                std::snprintf(name, sizeof(name), "scene_%03d", i);
                if (generated[i].image) {
                    const std::string pgm = std::string(name) + ".pgm";
                    write_pgm(*generated[i].image, (out_dir / pgm).string());
                    generated[i].scene.image_path = pgm;
                }
                write_file(out_dir / (std::string(name) + ".json"),
                           serialize_scene(generated[i].scene));
            }
            return 0;
        }

        if (eval->parsed()) {
            const std::vector<ScoredBox> preds = load_pred_boxes(preds_arg);
            const std::vector<AABox> gts = load_gt_boxes(gt_arg);
            const MatchResult mr = match_boxes(preds, gts, params.eval_iou);
            fs::create_directories(out_dir);
            const PRF p = prf(mr);
            write_file(out_dir / "eval.csv", eval_to_csv({{"input", p}}, p));
            return 0;
        }

        const std::vector<fs::path> scene_files = list_scene_files(scenes_arg);

        if (maskgen_cmd->parsed()) {
            fs::create_directories(out_dir);
            stage_maskgen(scene_files, out_dir, params);
        } else if (simulate->parsed()) {
            std::vector<Scene> scenes;
            for (const fs::path& f : scene_files) scenes.push_back(load_scene(f.string()));
            ScorerState scorer;
            scorer.learning_rate = params.sim_lr;
            const SimReport report =
                simulate_weak_training(scenes, scorer, params.sim_iters, params.mask, params.jobs);
            fs::create_directories(out_dir);
            write_file(out_dir / "sim_report.csv", report_to_csv(report));
        } else if (group->parsed()) {
            fs::create_directories(out_dir);
            stage_group(scene_files, out_dir, params);
        } else if (fitline->parsed()) {
            if (!fs::exists(groups_arg)) throw std::runtime_error(groups_arg + ": no such directory");
            fs::create_directories(out_dir);
            stage_fitline(scene_files, groups_arg, out_dir, params);
        } else if (rectify_cmd->parsed()) {
            if (!fs::exists(lines_arg)) throw std::runtime_error(lines_arg + ": no such directory");
            fs::create_directories(out_dir);
            stage_rectify(scene_files, lines_arg, out_dir, params);
        } else if (partition->parsed()) {
            if (!fs::exists(lines_arg)) throw std::runtime_error(lines_arg + ": no such directory");
            fs::create_directories(out_dir);
            stage_partition(scene_files, lines_arg, out_dir, params);
        } else if (pipeline->parsed()) {
            fs::create_directories(out_dir);
            stage_group(scene_files, out_dir, params);
            stage_fitline(scene_files, out_dir, out_dir, params);
            stage_rectify(scene_files, out_dir, out_dir, params);
            stage_partition(scene_files, out_dir, out_dir, params);
            stage_eval_pipeline(scene_files, out_dir, out_dir, params);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
