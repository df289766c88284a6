// Parsing between the flat command sequence and the structured model.
//
// The sequence language is ((SOL curve+)+ Extrude)+ EOS*. A small explicit
// automaton keeps the error reporting precise: every rejection names the
// first offending command index.

#include <cassert>

#include "cadseq/model.hpp"

namespace cadseq {

namespace {

enum class State {
    ExpectFirstSol,   // nothing consumed yet
    InLoopEmpty,      // SOL seen, need at least one curve
    InLoopFilled,     // curve seen: curve | SOL | Extrude may follow
    AfterExtrude,     // pair closed: SOL | EOS may follow
    Padding,          // EOS seen: only EOS may follow
};

[[noreturn]] void reject(std::size_t index, const std::string& what) {
    throw CadError(ErrorCode::GrammarError, what, static_cast<long>(index));
}

Curve curve_from_command(const CadCommand& c) {
    switch (c.kind) {
        case CommandKind::Line:
            return LineCurve{{c.p[slot::x], c.p[slot::y]}};
        case CommandKind::Arc:
            return ArcCurve{{c.p[slot::x], c.p[slot::y]}, c.p[slot::alpha],
                            c.p[slot::f] >= 0.5};
        case CommandKind::Circle:
            return CircleCurve{{c.p[slot::x], c.p[slot::y]}, c.p[slot::r]};
        default:
            assert(false);
            return LineCurve{};
    }
}

CadCommand command_from_curve(const Curve& c) {
    if (const auto* l = std::get_if<LineCurve>(&c)) return make_line(l->end.x, l->end.y);
    if (const auto* a = std::get_if<ArcCurve>(&c))
        return make_arc(a->end.x, a->end.y, a->sweep, a->ccw);
    const auto& circle = std::get<CircleCurve>(c);
    return make_circle(circle.center.x, circle.center.y, circle.radius);
}

ExtrudeSpec extrude_from_command(const CadCommand& c) {
    ExtrudeSpec e;
    e.theta = c.p[slot::theta];
    e.phi = c.p[slot::phi];
    e.gamma = c.p[slot::gamma];
    e.origin = {c.p[slot::px], c.p[slot::py], c.p[slot::pz]};
    e.scale = c.p[slot::s];
    e.e1 = c.p[slot::e1];
    e.e2 = c.p[slot::e2];
    const int b = static_cast<int>(c.p[slot::b] + 0.5);
    const int u = static_cast<int>(c.p[slot::u] + 0.5);
    if (b < 0 || b > 3) throw CadError(ErrorCode::BadLevel, "boolean code out of range", b);
    if (u < 0 || u > 2) throw CadError(ErrorCode::BadLevel, "extent code out of range", u);
    e.op = static_cast<BooleanOp>(b);
    e.extent = static_cast<ExtentKind>(u);
    return e;
}

CadCommand command_from_extrude(const ExtrudeSpec& e) {
    CadCommand c(CommandKind::Extrude);
    c.p[slot::theta] = e.theta;
    c.p[slot::phi] = e.phi;
    c.p[slot::gamma] = e.gamma;
    c.p[slot::px] = e.origin.x;
    c.p[slot::py] = e.origin.y;
    c.p[slot::pz] = e.origin.z;
    c.p[slot::s] = e.scale;
    c.p[slot::e1] = e.e1;
    c.p[slot::e2] = e.e2;
    c.p[slot::b] = static_cast<double>(static_cast<int>(e.op));
    c.p[slot::u] = static_cast<double>(static_cast<int>(e.extent));
    return c;
}

// Derive the stored chain start once a loop's curves are known. Mixed loops
// (circles inside a chain) are grammatically representable but geometrically
// meaningless; give them a deterministic start and let validate() flag them.
void finish_loop(Loop& loop) {
    if (loop.is_circle()) {
        loop.start = circle_loop_start(std::get<CircleCurve>(loop.curves[0]));
        return;
    }
    for (auto it = loop.curves.rbegin(); it != loop.curves.rend(); ++it) {
        if (!std::holds_alternative<CircleCurve>(*it)) {
            loop.start = curve_end(*it);
            return;
        }
    }
    loop.start = circle_loop_start(std::get<CircleCurve>(loop.curves[0]));
}

}  // namespace

CadModel parse(const CadSequence& seq) {
    if (seq.size() != kMaxCommands)
        throw CadError(ErrorCode::LengthMismatch,
                       "sequence must contain exactly " + std::to_string(kMaxCommands) +
                           " commands, got " + std::to_string(seq.size()));

    CadModel model;
    Profile profile;
    Loop loop;
    State state = State::ExpectFirstSol;

    for (std::size_t i = 0; i < seq.size(); ++i) {
        const CadCommand& cmd = seq[i];
        switch (cmd.kind) {
            case CommandKind::Sol:
                if (state == State::InLoopEmpty) reject(i, "empty loop: SOL directly after SOL");
                if (state == State::Padding) reject(i, "SOL after EOS");
                if (state == State::InLoopFilled) {
                    finish_loop(loop);
                    profile.push_back(std::move(loop));
                    loop = Loop{};
                }
                state = State::InLoopEmpty;
                break;
            case CommandKind::Line:
            case CommandKind::Arc:
            case CommandKind::Circle:
                if (state == State::ExpectFirstSol || state == State::AfterExtrude)
                    reject(i, "curve before any SOL");
                if (state == State::Padding) reject(i, "curve after EOS");
                loop.curves.push_back(curve_from_command(cmd));
                state = State::InLoopFilled;
                break;
            case CommandKind::Extrude:
                if (state == State::ExpectFirstSol || state == State::AfterExtrude)
                    reject(i, "extrude with empty profile");
                if (state == State::InLoopEmpty) reject(i, "extrude directly after SOL");
                if (state == State::Padding) reject(i, "extrude after EOS");
                finish_loop(loop);
                profile.push_back(std::move(loop));
                loop = Loop{};
                model.pairs.push_back({std::move(profile), extrude_from_command(cmd)});
                profile = Profile{};
                state = State::AfterExtrude;
                break;
            case CommandKind::Eos:
                if (state == State::ExpectFirstSol)
                    reject(i, "no sketch-extrude pair before EOS");
                if (state == State::InLoopEmpty || state == State::InLoopFilled)
                    reject(i, "sequence ends mid-profile");
                state = State::Padding;
                break;
        }
    }

    if (state != State::Padding && state != State::AfterExtrude)
        reject(seq.size(), "sequence ends mid-profile");
    return model;
}

bool grammar_ok(const CadSequence& seq) {
    try {
        (void)parse(seq);
        return true;
    } catch (const CadError&) {
        return false;
    }
}

std::size_t flat_command_count(const CadModel& model) {
    std::size_t n = 0;
    for (const auto& pair : model.pairs) {
        for (const auto& loop : pair.profile) n += 1 + loop.curves.size();
        n += 1;  // extrude
    }
    return n;
}

CadSequence flatten(const CadModel& model) {
    const std::size_t total = flat_command_count(model);
    if (total > kMaxCommands)
        throw CadError(ErrorCode::TooLong,
                       "model emits " + std::to_string(total) + " commands (limit " +
                           std::to_string(kMaxCommands) + ")");

    CadSequence seq;
    seq.cmds.reserve(kMaxCommands);
    for (const auto& pair : model.pairs) {
        for (const auto& loop : pair.profile) {
            seq.cmds.push_back(make_sol());
            for (const auto& curve : loop.curves) seq.cmds.push_back(command_from_curve(curve));
        }
        seq.cmds.push_back(command_from_extrude(pair.extrude));
    }
    while (seq.cmds.size() < kMaxCommands) seq.cmds.push_back(make_eos());
    return seq;
}

}  // namespace cadseq
