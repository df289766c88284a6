#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cadseq/error.hpp"

namespace cadseq {

// Integer codes are a serialization contract; do not reorder.
enum class CommandKind : int {
    Sol = 0,
    Line = 1,
    Arc = 2,
    Circle = 3,
    Extrude = 4,
    Eos = 5,
};

constexpr int kNumCommandKinds = 6;
constexpr int kNumParamSlots = 16;
constexpr int kMaxCommands = 60;        // fixed sequence length Nc
constexpr double kUnusedParam = -1.0;   // unused slots serialize as -1

// Parameter slot layout: [x, y, alpha, f, r, theta, phi, gamma,
//                         px, py, pz, s, e1, e2, b, u]
namespace slot {
constexpr int x = 0;
constexpr int y = 1;
constexpr int alpha = 2;
constexpr int f = 3;
constexpr int r = 4;
constexpr int theta = 5;
constexpr int phi = 6;
constexpr int gamma = 7;
constexpr int px = 8;
constexpr int py = 9;
constexpr int pz = 10;
constexpr int s = 11;
constexpr int e1 = 12;
constexpr int e2 = 13;
constexpr int b = 14;
constexpr int u = 15;
}  // namespace slot

constexpr std::array<const char*, kNumParamSlots> kSlotNames = {
    "x", "y", "alpha", "f", "r", "theta", "phi", "gamma",
    "px", "py", "pz", "s", "e1", "e2", "b", "u"};

const char* command_kind_name(CommandKind k);
CommandKind command_kind_from_code(int code);

// Slot usage is a pure function of the command kind.
constexpr uint16_t slot_mask(CommandKind k) {
    switch (k) {
        case CommandKind::Line: return 0b0000000000000011;                 // x, y
        case CommandKind::Arc: return 0b0000000000001111;                  // x, y, alpha, f
        case CommandKind::Circle: return 0b0000000000010011;               // x, y, r
        case CommandKind::Extrude: return 0b1111111111100000;              // theta .. u
        case CommandKind::Sol:
        case CommandKind::Eos: return 0;
    }
    return 0;
}

constexpr bool slot_used(CommandKind k, int s) { return (slot_mask(k) >> s) & 1; }

constexpr int used_slot_count(CommandKind k) {
    int n = 0;
    for (int s = 0; s < kNumParamSlots; ++s) n += slot_used(k, s);
    return n;
}

constexpr bool slot_is_discrete(int s) { return s == slot::f || s == slot::b || s == slot::u; }

// One command with its full 16-slot parameter vector (continuous values,
// pre-quantization). Unused slots hold kUnusedParam.
struct CadCommand {
    CommandKind kind = CommandKind::Eos;
    std::array<double, kNumParamSlots> p{};

    CadCommand() { p.fill(kUnusedParam); }
    explicit CadCommand(CommandKind k) : kind(k) { p.fill(kUnusedParam); }
};

CadCommand make_sol();
CadCommand make_eos();
CadCommand make_line(double x, double y);
CadCommand make_arc(double x, double y, double sweep, bool ccw);
CadCommand make_circle(double cx, double cy, double radius);

// Flat fixed-length command list (Nc = 60).
struct CadSequence {
    std::vector<CadCommand> cmds;

    std::size_t size() const { return cmds.size(); }
    const CadCommand& operator[](std::size_t i) const { return cmds[i]; }
    CadCommand& operator[](std::size_t i) { return cmds[i]; }
};

inline const char* command_kind_name(CommandKind k) {
    switch (k) {
        case CommandKind::Sol: return "SOL";
        case CommandKind::Line: return "L";
        case CommandKind::Arc: return "A";
        case CommandKind::Circle: return "R";
        case CommandKind::Extrude: return "E";
        case CommandKind::Eos: return "EOS";
    }
    return "?";
}

inline CommandKind command_kind_from_code(int code) {
    if (code < 0 || code >= kNumCommandKinds)
        throw CadError(ErrorCode::BadLevel, "command kind code out of range", code);
    return static_cast<CommandKind>(code);
}

inline CadCommand make_sol() { return CadCommand(CommandKind::Sol); }
inline CadCommand make_eos() { return CadCommand(CommandKind::Eos); }

inline CadCommand make_line(double x, double y) {
    CadCommand c(CommandKind::Line);
    c.p[slot::x] = x;
    c.p[slot::y] = y;
    return c;
}

inline CadCommand make_arc(double x, double y, double sweep, bool ccw) {
    CadCommand c(CommandKind::Arc);
    c.p[slot::x] = x;
    c.p[slot::y] = y;
    c.p[slot::alpha] = sweep;
    c.p[slot::f] = ccw ? 1.0 : 0.0;
    return c;
}

inline CadCommand make_circle(double cx, double cy, double radius) {
    CadCommand c(CommandKind::Circle);
    c.p[slot::x] = cx;
    c.p[slot::y] = cy;
    c.p[slot::r] = radius;
    return c;
}

}  // namespace cadseq
