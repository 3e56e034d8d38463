#include "textflow/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "textflow/util.hpp"

namespace textflow {

using nlohmann::json;

namespace {

AABox parse_box(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError(where + ": box must be [xmin,ymin,xmax,ymax]");
    AABox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!std::isfinite(b.xmin) || !std::isfinite(b.ymin) || !std::isfinite(b.xmax) ||
        !std::isfinite(b.ymax))
        throw ParseError(where + ": non-finite box coordinate");
    if (!b.valid()) throw ParseError(where + ": box has negative extent");
    return b;
}

Quad parse_quad(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError(where + ": quad must be four [x,y] points");
    std::array<Point, 4> pts;
    for (int i = 0; i < 4; ++i) {
        const json& p = j[i];
        if (!p.is_array() || p.size() != 2)
            throw ParseError(where + ": quad point must be [x,y]");
        pts[i] = {p[0].get<double>(), p[1].get<double>()};
        if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y))
            throw ParseError(where + ": non-finite quad coordinate");
    }
    Quad q(pts);
    if (q.area() <= 0.0) throw ParseError(where + ": degenerate quad");
    return q;
}

json box_to_json(const AABox& b) { return json::array({b.xmin, b.ymin, b.xmax, b.ymax}); }

}  // namespace

Scene parse_scene(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scene document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scene document: top level must be an object");

    Scene scene;
    if (doc.contains("image")) scene.image_path = doc["image"].get<std::string>();

    std::set<int> seen_ids;
    if (doc.contains("candidates")) {
        const json& cands = doc["candidates"];
        if (!cands.is_array()) throw ParseError("candidates: must be an array");
        int index = 0;
        for (const json& c : cands) {
            const std::string where = "candidates[" + std::to_string(index) + "]";
            if (!c.is_object() || !c.contains("id") || !c.contains("box") || !c.contains("score"))
                throw ParseError(where + ": requires id, box, score");
            CharCandidate cand;
            cand.id = c["id"].get<int>();
            cand.box = parse_box(c["box"], where);
            cand.score = c["score"].get<double>();
            if (!(cand.score >= 0.0 && cand.score <= 1.0))
                throw ParseError(where + ": score " + std::to_string(cand.score) +
                                 " outside [0,1]");
            if (!seen_ids.insert(cand.id).second)
                throw ParseError(where + ": duplicate candidate id " + std::to_string(cand.id));
            if (c.contains("features")) {
                for (const json& f : c["features"]) cand.features.push_back(f.get<double>());
            }
            if (c.contains("src")) cand.src = c["src"].get<int>();
            scene.candidates.push_back(std::move(cand));
            ++index;
        }
    }

    if (doc.contains("words")) {
        const json& words = doc["words"];
        if (!words.is_array()) throw ParseError("words: must be an array");
        int index = 0;
        for (const json& w : words) {
            const std::string where = "words[" + std::to_string(index) + "]";
            WordAnnotation anno;
            if (w.contains("box") && w.contains("quad"))
                throw ParseError(where + ": box and quad are mutually exclusive");
            if (w.contains("box")) {
                const AABox b = parse_box(w["box"], where);
                if (b.area() <= 0.0) throw ParseError(where + ": degenerate word box");
                anno.region = b;
            } else if (w.contains("quad")) {
                anno.region = parse_quad(w["quad"], where);
            } else {
                throw ParseError(where + ": requires box or quad");
            }
            if (w.contains("char_count")) {
                const int n = w["char_count"].get<int>();
                if (n < 1) throw ParseError(where + ": char_count must be >= 1");
                anno.char_count = n;
            }
            if (w.contains("text")) anno.transcription = w["text"].get<std::string>();
            scene.words.push_back(std::move(anno));
            ++index;
        }
    }

    if (doc.contains("gt_chars")) {
        int index = 0;
        for (const json& g : doc["gt_chars"]) {
            scene.gt_chars.push_back(parse_box(g, "gt_chars[" + std::to_string(index) + "]"));
            ++index;
        }
    }

    if (doc.contains("gt_lines")) {
        int index = 0;
        for (const json& l : doc["gt_lines"]) {
            const std::string where = "gt_lines[" + std::to_string(index) + "]";
            if (!l.is_object() || !l.contains("chars"))
                throw ParseError(where + ": requires chars array");
            LineTruth line;
            for (const json& c : l["chars"]) {
                const int idx = c.get<int>();
                if (idx < 0 || idx >= static_cast<int>(scene.gt_chars.size()))
                    throw ParseError(where + ": char index out of range");
                line.char_indices.push_back(idx);
            }
            scene.gt_lines.push_back(std::move(line));
            ++index;
        }
    }

    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scene(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string serialize_scene(const Scene& scene) {
    json doc = json::object();
    if (scene.image_path) doc["image"] = *scene.image_path;
    json cands = json::array();
    for (const CharCandidate& c : scene.candidates) {
        json jc = {{"id", c.id}, {"box", box_to_json(c.box)}, {"score", c.score}};
        if (!c.features.empty()) jc["features"] = c.features;
        if (c.src) jc["src"] = *c.src;
        cands.push_back(std::move(jc));
    }
    doc["candidates"] = std::move(cands);
    json words = json::array();
    for (const WordAnnotation& w : scene.words) {
        json jw = json::object();
        if (w.is_quad()) {
            json q = json::array();
            for (const Point& p : w.quad().pts) q.push_back(json::array({p.x, p.y}));
            jw["quad"] = std::move(q);
        } else {
            jw["box"] = box_to_json(w.box());
        }
        if (w.char_count) jw["char_count"] = *w.char_count;
        if (w.transcription) jw["text"] = *w.transcription;
        words.push_back(std::move(jw));
    }
    doc["words"] = std::move(words);
    if (!scene.gt_chars.empty()) {
        json gt = json::array();
        for (const AABox& b : scene.gt_chars) gt.push_back(box_to_json(b));
        doc["gt_chars"] = std::move(gt);
    }
    if (!scene.gt_lines.empty()) {
        json lines = json::array();
        for (const LineTruth& l : scene.gt_lines)
            lines.push_back(json{{"chars", l.char_indices}});
        doc["gt_lines"] = std::move(lines);
    }
    return doc.dump(2) + "\n";
}

std::vector<int> assign_anchor_labels(const std::vector<AABox>& gt_chars,
                                      const AnchorSpec& anchors) {
    std::vector<int> labels(gt_chars.size(), kUnmatchedAnchor);
    for (size_t i = 0; i < gt_chars.size(); ++i) {
        const double diag = gt_chars[i].diagonal();
        double best_cost = 0.0;
        for (size_t a = 0; a < anchors.diagonals.size(); ++a) {
            const double ratio = diag / anchors.diagonals[a];
            if (ratio < anchors.band_low || ratio >= anchors.band_high) continue;
            const double cost = std::abs(std::log(ratio));
            if (labels[i] == kUnmatchedAnchor || cost < best_cost) {
                labels[i] = static_cast<int>(a);
                best_cost = cost;
            }
        }
    }
    return labels;
}

}  // namespace textflow
