#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pss/fixed.hpp"

namespace pss {

// Rank order doubles as the tie-break among records of one node at one instant.
enum class Kind : std::uint8_t { C, R, L1, L2, P, S, D0, D1, K, G0, G1, G2, G3, G4, G5, H, D2 };

const char* kind_name(Kind k);
bool parse_kind(const std::string& s, Kind& out);
inline bool is_g_kind(Kind k) { return k >= Kind::G0 && k <= Kind::G5; }

// Wire message types, shared with the network layer.
enum class MsgType : std::uint8_t { Mark, Initiator, Support, Confirm, BA };
const char* msg_type_name(MsgType t);

// Fields are interpreted per kind:
//   C   a=tau b=flags (1 happy, 2 best)
//   R   a=source b=mark value c=tau at receipt x=flags
//   P   a=k_A b=tau c=mark value sent
//   S   a=msg type b=value or General c=round x=bit
//   L1/L2/D0/D1/D2  a=tau_sch after (D*) or tau (L*)
//   K   a=k
//   G0..G5 a=General b=input/output bit c=estimate offset
//   H   a=General
struct EventRecord {
    Fixed time;
    int node = 0;
    Kind kind = Kind::C;
    std::int64_t a = 0, b = 0, c = 0, x = 0;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct ExecutionTrace {
    std::map<std::string, std::string> meta;  // n, f, seed, params digest, faulty set, config
    std::vector<EventRecord> records;
    std::vector<std::string> diagnostics;

    // Sort by (time, node, kind rank), stable within equal keys.
    void normalize();
    std::string digest() const;
    void write(std::ostream& os) const;
    static ExecutionTrace read(std::istream& is);
};

std::string format_record(const EventRecord& r);

}  // namespace pss
