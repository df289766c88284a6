#include "json.hpp"

#include "cadseq/dataops.hpp"

namespace cadseq {

using nlohmann::json;

namespace {

json curve_to_json(const Curve& c) {
    json j;
    if (const auto* line = std::get_if<LineCurve>(&c)) {
        j["t"] = "L";
        j["x"] = line->end.x;
        j["y"] = line->end.y;
    } else if (const auto* arc = std::get_if<ArcCurve>(&c)) {
        j["t"] = "A";
        j["x"] = arc->end.x;
        j["y"] = arc->end.y;
        j["alpha"] = arc->sweep;
        j["f"] = arc->ccw ? 1 : 0;
    } else {
        const auto& circle = std::get<CircleCurve>(c);
        j["t"] = "C";
        j["x"] = circle.center.x;
        j["y"] = circle.center.y;
        j["r"] = circle.radius;
    }
    return j;
}

Curve curve_from_json(const json& j) {
    const std::string t = j.at("t").get<std::string>();
    if (t == "L") return LineCurve{{j.at("x").get<double>(), j.at("y").get<double>()}};
    if (t == "A")
        return ArcCurve{{j.at("x").get<double>(), j.at("y").get<double>()},
                        j.at("alpha").get<double>(),
                        j.at("f").get<int>() != 0};
    if (t == "C")
        return CircleCurve{{j.at("x").get<double>(), j.at("y").get<double>()},
                           j.at("r").get<double>()};
    throw CadError(ErrorCode::IoError, "unknown curve type '" + t + "'");
}

}  // namespace

std::string model_to_json(const CadModel& model) {
    json pairs = json::array();
    for (const auto& pair : model.pairs) {
        json loops = json::array();
        for (const Loop& loop : pair.profile) {
            json curves = json::array();
            for (const Curve& c : loop.curves) curves.push_back(curve_to_json(c));
            loops.push_back(std::move(curves));
        }
        const auto& e = pair.extrude;
        json extrude = {{"theta", e.theta}, {"phi", e.phi},     {"gamma", e.gamma},
                        {"px", e.origin.x}, {"py", e.origin.y}, {"pz", e.origin.z},
                        {"s", e.scale},     {"e1", e.e1},       {"e2", e.e2},
                        {"b", static_cast<int>(e.op)},          {"u", static_cast<int>(e.extent)}};
        pairs.push_back({{"loops", std::move(loops)}, {"extrude", std::move(extrude)}});
    }
    return json{{"pairs", std::move(pairs)}}.dump(2) + "\n";
}

CadModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw CadError(ErrorCode::IoError, std::string("model JSON: ") + e.what());
    }
    try {
        CadModel model;
        for (const json& jp : j.at("pairs")) {
            SketchExtrudePair pair;
            for (const json& jl : jp.at("loops")) {
                Loop loop;
                for (const json& jc : jl) loop.curves.push_back(curve_from_json(jc));
                if (loop.curves.empty())
                    throw CadError(ErrorCode::IoError, "loop without curves");
                // chain start is implicit in the schema
                loop.start = loop.is_circle()
                                 ? circle_loop_start(std::get<CircleCurve>(loop.curves[0]))
                                 : curve_end(loop.curves.back());
                pair.profile.push_back(std::move(loop));
            }
            const json& je = jp.at("extrude");
            auto& e = pair.extrude;
            e.theta = je.at("theta").get<double>();
            e.phi = je.at("phi").get<double>();
            e.gamma = je.at("gamma").get<double>();
            e.origin = {je.at("px").get<double>(), je.at("py").get<double>(),
                        je.at("pz").get<double>()};
            e.scale = je.at("s").get<double>();
            e.e1 = je.at("e1").get<double>();
            e.e2 = je.at("e2").get<double>();
            const int b = je.at("b").get<int>();
            const int u = je.at("u").get<int>();
            if (b < 0 || b > 3) throw CadError(ErrorCode::IoError, "boolean code out of range");
            if (u < 0 || u > 2) throw CadError(ErrorCode::IoError, "extent code out of range");
            e.op = static_cast<BooleanOp>(b);
            e.extent = static_cast<ExtentKind>(u);
            model.pairs.push_back(std::move(pair));
        }
        return model;
    } catch (const json::exception& e) {
        throw CadError(ErrorCode::IoError, std::string("model JSON: ") + e.what());
    }
}

}  // namespace cadseq
