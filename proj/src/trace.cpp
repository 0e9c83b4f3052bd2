#include "pss/trace.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pss {

namespace {

constexpr std::array<const char*, 17> kKindNames = {"C",  "R",  "L1", "L2", "P",  "S",  "D0", "D1", "K",
                                                     "G0", "G1", "G2", "G3", "G4", "G5", "H",  "D2"};

struct FieldNames {
    const char* a;
    const char* b;
    const char* c;
    const char* x;
};

FieldNames names_for(Kind k) {
    switch (k) {
        case Kind::C: return {"tau", "flags", nullptr, nullptr};
        case Kind::R: return {"src", "v", "tau", "flags"};
        case Kind::P: return {"k", "tau", "v", nullptr};
        case Kind::S: return {"type", "val", "round", "bit"};
        case Kind::L1:
        case Kind::L2: return {"tau", nullptr, nullptr, nullptr};
        case Kind::D0:
        case Kind::D1:
        case Kind::D2: return {"sch", nullptr, nullptr, nullptr};
        case Kind::K: return {"k", nullptr, nullptr, nullptr};
        case Kind::H: return {"gen", nullptr, nullptr, nullptr};
        default: return {"gen", "bit", "off", nullptr};
    }
}

}  // namespace

const char* kind_name(Kind k) { return kKindNames[static_cast<std::size_t>(k)]; }

bool parse_kind(const std::string& s, Kind& out) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (s == kKindNames[i]) {
            out = static_cast<Kind>(i);
            return true;
        }
    }
    return false;
}

const char* msg_type_name(MsgType t) {
    switch (t) {
        case MsgType::Mark: return "mark";
        case MsgType::Initiator: return "initiator";
        case MsgType::Support: return "support";
        case MsgType::Confirm: return "confirm";
        case MsgType::BA: return "ba";
    }
    return "?";
}

void ExecutionTrace::normalize() {
    std::stable_sort(records.begin(), records.end(), [](const EventRecord& l, const EventRecord& r) {
        if (l.time != r.time) return l.time < r.time;
        if (l.node != r.node) return l.node < r.node;
        return l.kind < r.kind;
    });
}

std::string format_record(const EventRecord& r) {
    std::ostringstream os;
    os << "t=" << r.time.str() << " node=" << r.node << " kind=" << kind_name(r.kind);
    FieldNames f = names_for(r.kind);
    if (f.a) os << ' ' << f.a << '=' << r.a;
    if (f.b) os << ' ' << f.b << '=' << r.b;
    if (f.c) os << ' ' << f.c << '=' << r.c;
    if (f.x) os << ' ' << f.x << '=' << r.x;
    return os.str();
}

std::string ExecutionTrace::digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        h ^= '\n';
        h *= 1099511628211ULL;
    };
    for (const auto& r : records) feed(format_record(r));
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void ExecutionTrace::write(std::ostream& os) const {
    for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
    for (const auto& r : records) os << format_record(r) << '\n';
}

ExecutionTrace ExecutionTrace::read(std::istream& is) {
    ExecutionTrace tr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos || line.size() < 3) continue;
            tr.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        EventRecord r;
        bool have_kind = false;
        std::map<std::string, std::int64_t> fields;
        while (ls >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": bad token");
            std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "t") {
                r.time = Fixed::parse(val);
            } else if (key == "node") {
                r.node = std::stoi(val);
            } else if (key == "kind") {
                if (!parse_kind(val, r.kind))
                    throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown kind " + val);
                have_kind = true;
            } else {
                fields[key] = std::stoll(val);
            }
        }
        if (!have_kind) throw std::invalid_argument("line " + std::to_string(lineno) + ": missing kind");
        FieldNames f = names_for(r.kind);
        auto get = [&](const char* name) -> std::int64_t {
            if (!name) return 0;
            auto it = fields.find(name);
            return it == fields.end() ? 0 : it->second;
        };
        r.a = get(f.a);
        r.b = get(f.b);
        r.c = get(f.c);
        r.x = get(f.x);
        tr.records.push_back(r);
    }
    return tr;
}

}  // namespace pss
