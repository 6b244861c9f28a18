#include "aidcots/matpower.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

namespace aidcots {

namespace {

struct Row {
    std::vector<double> values;
    int line = 0;
};

struct CaseText {
    std::string name;
    double base_mva = 0.0;
    bool has_base = false;
    std::map<std::string, std::vector<Row>> matrices;
};

std::string_view strip_comment(std::string_view line) {
    auto pos = line.find('%');
    return pos == std::string_view::npos ? line : line.substr(0, pos);
}

bool parse_values(std::string_view text, int line_no, std::vector<Row>& out) {
    // Rows are separated by ';'. A trailing fragment without ';' stays open
    // until the next line, but the files we read keep one row per line.
    std::size_t start = 0;
    bool closed_matrix = false;
    while (start <= text.size()) {
        std::size_t semi = text.find(';', start);
        std::string_view chunk = text.substr(start, semi == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : semi - start);
        if (auto bracket = chunk.find(']'); bracket != std::string_view::npos) {
            chunk = chunk.substr(0, bracket);
            closed_matrix = true;
        }
        Row row;
        row.line = line_no;
        const char* p = chunk.data();
        const char* end = chunk.data() + chunk.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
            if (p >= end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw MalformedRowError(std::string("cannot parse number near '") +
                                            std::string(p, std::min<std::size_t>(8, end - p)) + "'",
                                        line_no);
            }
            row.values.push_back(v);
            p = next;
        }
        if (!row.values.empty()) out.push_back(std::move(row));
        if (closed_matrix || semi == std::string_view::npos) break;
        start = semi + 1;
    }
    return closed_matrix;
}

CaseText scan(std::string_view text) {
    CaseText out;
    std::string current;  // matrix currently being filled
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = strip_comment(text.substr(pos, eol - pos));
        ++line_no;
        pos = eol + 1;

        if (!current.empty()) {
            if (parse_values(line, line_no, out.matrices[current])) current.clear();
            continue;
        }

        auto fn = line.find("function");
        if (fn != std::string_view::npos) {
            auto eq = line.find('=', fn);
            if (eq != std::string_view::npos) {
                std::string name(line.substr(eq + 1));
                name.erase(0, name.find_first_not_of(" \t"));
                name.erase(name.find_last_not_of(" \t\r;") + 1);
                out.name = name;
            }
            continue;
        }

        auto mpc = line.find("mpc.");
        if (mpc == std::string_view::npos) continue;
        auto eq = line.find('=', mpc);
        if (eq == std::string_view::npos) continue;
        std::string field(line.substr(mpc + 4, eq - mpc - 4));
        field.erase(field.find_last_not_of(" \t") + 1);

        std::string_view rhs = line.substr(eq + 1);
        if (field == "baseMVA") {
            const char* p = rhs.data();
            const char* end = rhs.data() + rhs.size();
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            (void)next;
            if (ec != std::errc()) throw MalformedRowError("bad baseMVA", line_no);
            out.base_mva = v;
            out.has_base = true;
            continue;
        }
        auto bracket = rhs.find('[');
        if (bracket == std::string_view::npos) continue;  // non-matrix field, ignored
        current = field;
        if (parse_values(rhs.substr(bracket + 1), line_no, out.matrices[current])) current.clear();
    }
    return out;
}

void require_columns(const Row& row, std::size_t n, const char* what) {
    if (row.values.size() < n) {
        throw MalformedRowError(std::string(what) + " row needs " + std::to_string(n) +
                                    " columns, got " + std::to_string(row.values.size()),
                                row.line);
    }
}

}  // namespace

Network parse_matpower(std::string_view text, const MatpowerOptions& opts) {
    CaseText ct = scan(text);
    if (!ct.has_base) throw MissingMatrixError("mpc.baseMVA");
    for (const char* required : {"bus", "gen", "branch"}) {
        if (ct.matrices.find(required) == ct.matrices.end() || ct.matrices[required].empty()) {
            throw MissingMatrixError(std::string("mpc.") + required);
        }
    }
    const double base = ct.base_mva;
    if (base <= 0.0) throw Error("baseMVA must be positive");

    std::vector<Bus> buses;
    int slack_count = 0;
    for (const Row& row : ct.matrices["bus"]) {
        require_columns(row, 13, "bus");
        const auto& v = row.values;
        Bus b;
        b.id = static_cast<int>(v[0]);
        switch (static_cast<int>(v[1])) {
            case 3: b.kind = BusKind::Slack; ++slack_count; break;
            case 2: b.kind = BusKind::PV; break;
            case 1: b.kind = BusKind::PQ; break;
            default: throw MalformedRowError("unsupported bus type", row.line);
        }
        b.p_demand = v[2] / base;
        b.q_demand = v[3] / base;
        b.g_shunt = v[4] / base;
        b.b_shunt = v[5] / base;
        b.v_setpoint = v[7];
        b.a_setpoint = v[8] * std::numbers::pi / 180.0;
        b.v_max = v[11];
        b.v_min = v[12];
        if (!(b.v_min <= b.v_max)) throw MalformedRowError("Vmin above Vmax", row.line);
        if (!std::isfinite(b.p_demand) || !std::isfinite(b.q_demand)) {
            throw MalformedRowError("non-finite demand", row.line);
        }
        buses.push_back(b);
    }
    if (slack_count != 1) throw NoSlackBusError(slack_count);

    std::vector<Generator> gens;
    for (const Row& row : ct.matrices["gen"]) {
        require_columns(row, 10, "gen");
        const auto& v = row.values;
        Generator g;
        g.bus = static_cast<int>(v[0]);
        g.q_max = v[3] / base;
        g.q_min = v[4] / base;
        g.v_setpoint = v[5];
        g.in_service = v[7] > 0.0;
        g.p_max = v[8] / base;
        g.p_min = v[9] / base;
        if (g.p_min > g.p_max || g.q_min > g.q_max) {
            throw MalformedRowError("generator limits inverted", row.line);
        }
        gens.push_back(g);
    }

    if (auto it = ct.matrices.find("gencost"); it != ct.matrices.end()) {
        if (it->second.size() != gens.size()) {
            throw MalformedRowError("gencost rows do not match gen rows",
                                    it->second.empty() ? 0 : it->second.front().line);
        }
        for (std::size_t i = 0; i < gens.size(); ++i) {
            const Row& row = it->second[i];
            require_columns(row, 4, "gencost");
            const auto& v = row.values;
            if (static_cast<int>(v[0]) != 2) {
                throw MalformedRowError("only polynomial cost model 2 is supported", row.line);
            }
            int ncost = static_cast<int>(v[3]);
            if (ncost < 0 || ncost > 3 || row.values.size() < 4 + static_cast<std::size_t>(ncost)) {
                throw MalformedRowError("cost polynomial degree above 2", row.line);
            }
            // coefficients arrive highest order first
            double c[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < ncost; ++k) c[ncost - 1 - k] = v[4 + static_cast<std::size_t>(k)];
            gens[i].cost_c0 = c[0];
            gens[i].cost_c1 = c[1];
            gens[i].cost_c2 = c[2];
        }
    }

    // set PV/slack voltage targets from the first in-service generator at a bus
    for (Bus& b : buses) {
        if (b.kind == BusKind::PQ) continue;
        for (const Generator& g : gens) {
            if (g.bus == b.id && g.in_service && g.v_setpoint > 0.0) {
                b.v_setpoint = g.v_setpoint;
                break;
            }
        }
    }

    double total_demand = 0.0;
    for (const Bus& b : buses) total_demand += b.p_demand;
    const double unlimited = total_demand > 0.0 ? 10.0 * total_demand : 100.0;

    std::vector<Branch> branches;
    for (const Row& row : ct.matrices["branch"]) {
        require_columns(row, 11, "branch");
        const auto& v = row.values;
        Branch br;
        br.from_bus = static_cast<int>(v[0]);
        br.to_bus = static_cast<int>(v[1]);
        br.r = v[2];
        br.x = v[3];
        br.b_charge = v[4];
        br.rate_a = v[5] > 0.0 ? v[5] / base : unlimited;
        br.tap = v[8] != 0.0 ? v[8] : 1.0;
        br.shift = v[9] * std::numbers::pi / 180.0;
        br.in_service = v[10] > 0.0;
        if (br.x == 0.0) throw MalformedRowError("zero branch reactance", row.line);
        br.switchable = br.in_service && (br.tap == 1.0 || opts.switchable_transformers);
        branches.push_back(br);
    }

    return Network(base, std::move(buses), std::move(branches), std::move(gens),
                   ct.name.empty() ? "case" : ct.name);
}

Network load_case(const std::filesystem::path& path, const MatpowerOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open case file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matpower(ss.str(), opts);
}

std::string to_matpower(const Network& net) {
    const double base = net.base_mva();
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.15g", v);
        os << '\t' << buf;
    };
    os << "function mpc = " << net.name() << "\nmpc.version = '2';\nmpc.baseMVA = " << base
       << ";\n\nmpc.bus = [\n";
    for (const Bus& b : net.buses()) {
        os << '\t' << b.id;
        int kind = b.kind == BusKind::Slack ? 3 : (b.kind == BusKind::PV ? 2 : 1);
        os << '\t' << kind;
        num(b.p_demand * base);
        num(b.q_demand * base);
        num(b.g_shunt * base);
        num(b.b_shunt * base);
        os << "\t1";
        num(b.v_setpoint);
        num(b.a_setpoint * 180.0 / std::numbers::pi);
        os << "\t0\t1";
        num(b.v_max);
        num(b.v_min);
        os << ";\n";
    }
    os << "];\n\nmpc.gen = [\n";
    for (const Generator& g : net.generators()) {
        os << '\t' << g.bus;
        os << "\t0\t0";
        num(g.q_max * base);
        num(g.q_min * base);
        num(g.v_setpoint);
        os << '\t' << base << '\t' << (g.in_service ? 1 : 0);
        num(g.p_max * base);
        num(g.p_min * base);
        os << ";\n";
    }
    os << "];\n\nmpc.gencost = [\n";
    for (const Generator& g : net.generators()) {
        os << "\t2\t0\t0\t3";
        num(g.cost_c2);
        num(g.cost_c1);
        num(g.cost_c0);
        os << ";\n";
    }
    os << "];\n\nmpc.branch = [\n";
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const Branch& br = net.branches()[l];
        os << '\t' << br.from_bus << '\t' << br.to_bus;
        num(br.r);
        num(br.x);
        num(br.b_charge);
        num(br.rate_a * base);
        os << "\t0\t0";
        num(br.tap);
        num(br.shift * 180.0 / std::numbers::pi);
        os << '\t' << (br.in_service ? 1 : 0) << "\t-360\t360;\n";
    }
    os << "];\n";
    return os.str();
}

}  // namespace aidcots
