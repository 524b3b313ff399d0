#include "toruslab/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "toruslab/entropy/bowen.hpp"
#include "toruslab/entropy/tube.hpp"
#include "toruslab/errors.hpp"

namespace toruslab::harness {

void Table::add(std::vector<ojson> row) {
    if (row.size() != columns_.size()) throw PreconditionError("table row has the wrong number of columns");
    rows_.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw std::out_of_range("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns_.begin());
}

ojson Table::to_json() const {
    ojson rows = ojson::array();
    for (const auto& r : rows_) rows.push_back(r);
    return {{"columns", columns_}, {"rows", rows}};
}

Table Table::from_json(const ojson& j) {
    Table t(j.at("columns").get<std::vector<std::string>>());
    for (const auto& r : j.at("rows")) t.add(r.get<std::vector<ojson>>());
    return t;
}

std::string Table::to_csv() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& r : rows_) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) os << ',';
            if (r[c].is_string()) {
                std::string s = r[c].get<std::string>();
                if (s.find_first_of(",\"\n") != std::string::npos) {
                    std::string q = "\"";
                    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                    s = q + "\"";
                }
                os << s;
            } else if (r[c].is_boolean()) {
                os << (r[c].get<bool>() ? 1 : 0);
            } else {
                os << r[c].dump();
            }
        }
        os << '\n';
    }
    return os.str();
}

namespace {

bool has_table(const ojson& report, const char* name) {
    return report.contains("tables") && report["tables"].contains(name);
}

Table table(const ojson& report, const char* name) { return Table::from_json(report["tables"][name]); }

double num(const Table& t, std::size_t row, const char* col) { return t.at(row, col).get<double>(); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Rows grouped by the integer "centre" column, in first-seen order.
std::vector<std::pair<long long, std::vector<std::size_t>>> by_centre(const Table& t) {
    std::vector<std::pair<long long, std::vector<std::size_t>>> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const long long c = t.at(i, "centre").get<long long>();
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == c; });
        if (it == out.end()) {
            out.push_back({c, {}});
            it = out.end() - 1;
        }
        it->second.push_back(i);
    }
    return out;
}

entropy::Slopes fit(const Table& t, std::span<const std::size_t> rows, const char* x, const char* y) {
    std::vector<double> xs, ys;
    for (std::size_t i : rows) {
        xs.push_back(num(t, i, x));
        ys.push_back(num(t, i, y));
    }
    return entropy::entropy_estimate(xs, ys);
}

std::vector<std::size_t> all_rows(const Table& t) {
    std::vector<std::size_t> r(t.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
    return r;
}

struct TubeInfo {
    double mu = 0.0;
    double delta = 0.0;
    double C1 = 0.0;
};

std::map<long long, TubeInfo> tube_info(const Table& tubes) {
    std::map<long long, TubeInfo> out;
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        out[tubes.at(i, "centre").get<long long>()] = {num(tubes, i, "mu"), num(tubes, i, "delta"), num(tubes, i, "C1")};
    }
    return out;
}

// Smallest triangle area for (centre, delta); 0 when there is none.
double min_area(const Table& tri, long long centre, double delta) {
    double best = -1.0;
    for (std::size_t i = 0; i < tri.size(); ++i) {
        if (tri.at(i, "centre").get<long long>() != centre || num(tri, i, "delta") != delta) continue;
        const double a = num(tri, i, "area");
        best = best < 0.0 ? a : std::min(best, a);
    }
    return std::max(best, 0.0);
}

}  // namespace

std::vector<Flag> evaluate_flags(const ojson& report) {
    std::vector<Flag> flags;
    const ojson& constants = report.contains("constants") ? report["constants"] : ojson::object();

    if (has_table(report, "spanning_series")) {
        const Table t = table(report, "spanning_series");
        const double c_eps = constants.at("C_eps").get<double>();
        Flag ball{"ball-packing", "#F_r^eps * C_eps <= vol B(x, r + a + eps/2)", true, ""};
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double lhs = num(t, i, "shell") * c_eps;
            if (!(lhs <= num(t, i, "volume_min"))) {
                ball.pass = false;
                ball.detail += "r=" + fmt(num(t, i, "r")) + ": " + fmt(lhs) + " > " + fmt(num(t, i, "volume_min")) + "; ";
            }
        }
        flags.push_back(ball);

        Flag rate{"volume-rate-decreasing", "(1/r) log(vol / C_eps) decreasing in r", true, ""};
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (!(num(t, i, "volume_rate") < num(t, i - 1, "volume_rate"))) rate.pass = false;
        }
        flags.push_back(rate);

        const auto s = fit(t, all_rows(t), "r", "P");
        flags.push_back({"spanning-slope", "d log #P_r / dr <= tol", s.linear <= kSlopeTolerance,
                         "slope_linear " + fmt(s.linear)});
    }

    if (has_table(report, "spanning_witnesses")) {
        const Table t = table(report, "spanning_witnesses");
        Flag f{"spanning-cover", "dbar(w, v_yz)_r <= beta for every witness", t.size() > 0, ""};
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            worst = std::max(worst, num(t, i, "ratio"));
            if (!t.at(i, "matched").get<bool>() || !(num(t, i, "ratio") <= 1.0)) f.pass = false;
        }
        f.detail = "worst ratio " + fmt(worst) + " over " + std::to_string(t.size()) + " witnesses";
        flags.push_back(f);
    }

    if (has_table(report, "entropy_series")) {
        const Table t = table(report, "entropy_series");
        const auto sep = fit(t, all_rows(t), "T", "separated");
        const auto span = fit(t, all_rows(t), "T", "spanning");
        flags.push_back({"restricted-entropy", "d log r_T / dT <= tol on minimal initial conditions",
                         sep.linear <= kSlopeTolerance,
                         "separated " + fmt(sep.linear) + ", spanning " + fmt(span.linear)});
    }

    if (has_table(report, "minimal_records")) {
        const Table t = table(report, "minimal_records");
        Flag f{"projection-monotone", "projection to the accompanying line strictly monotone", true, ""};
        std::size_t n = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t.at(i, "certified").get<bool>()) continue;
            ++n;
            if (!t.at(i, "monotone").get<bool>()) {
                f.pass = false;
                f.detail += "record " + t.at(i, "index").dump() + "; ";
            }
        }
        if (n == 0) f.pass = false;
        f.detail += std::to_string(n) + " certified records";
        flags.push_back(f);
    }

    if (has_table(report, "crossings")) {
        const Table t = table(report, "crossings");
        Flag f{"non-crossing", "distinct minimal geodesics cross at most once, never with equal irrational rotation",
               true, ""};
        std::size_t same = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const long long c = t.at(i, "count").get<long long>();
            const bool s = t.at(i, "same_irrational").get<bool>();
            same += s;
            if (c > 1 || (s && c != 0)) f.pass = false;
        }
        f.detail = std::to_string(t.size()) + " pairs, " + std::to_string(same) + " with equal irrational rotation";
        flags.push_back(f);
    }

    if (has_table(report, "tubes") && has_table(report, "tube_series") && has_table(report, "triangles")) {
        const Table tubes = table(report, "tubes");
        const Table series = table(report, "tube_series");
        const Table tri = table(report, "triangles");
        const auto info = tube_info(tubes);

        Flag bound{"tube-growth-bound", "#F(T, delta) <= (C1 mu (T+1+2mu+4delta) / C2(delta)) (2 mu / delta)", true,
                   ""};
        Flag slope{"tube-slope", "slope_linear <= tol and slope_log <= 1.3 inside every tube", true, ""};
        for (const auto& [centre, rows] : by_centre(series)) {
            const TubeInfo& ti = info.at(centre);
            const double C2 = min_area(tri, centre, ti.delta);
            for (std::size_t i : rows) {
                const double b = C2 > 0.0 ? entropy::tube_bound(ti.C1, C2, ti.mu, num(series, i, "T"), ti.delta)
                                          : geometry::kInfinity;
                if (!(C2 > 0.0) || !(num(series, i, "separated") <= b)) {
                    bound.pass = false;
                    bound.detail += "centre " + std::to_string(centre) + " T=" + fmt(num(series, i, "T")) + "; ";
                }
            }
            const auto s = fit(series, rows, "T", "separated");
            if (!(s.linear <= kSlopeTolerance) || !(s.log <= kSlopeLogTolerance)) slope.pass = false;
            slope.detail += "centre " + std::to_string(centre) + ": " + fmt(s.linear) + "/" + fmt(s.log) + "; ";
        }
        flags.push_back(bound);
        flags.push_back(slope);

        Flag rot{"tube-rotation", "tube members share the centre's rotation up to the detectable angle", true, ""};
        for (std::size_t i = 0; i < tubes.size(); ++i) {
            if (!tubes.at(i, "rotation_consistent").get<bool>()) rot.pass = false;
        }
        flags.push_back(rot);

        Flag area{"triangle-area", "C2(delta) > 0 and delta/2 < side <= 2 mu + delta/2", tri.size() > 0, ""};
        std::map<double, std::pair<double, std::size_t>> per_delta;
        for (std::size_t i = 0; i < tri.size(); ++i) {
            const double delta = num(tri, i, "delta");
            const double mu = info.at(tri.at(i, "centre").get<long long>()).mu;
            const double a = num(tri, i, "area");
            auto& [C2, n] = per_delta.try_emplace(delta, a, 0).first->second;
            C2 = std::min(C2, a);
            ++n;
            for (const char* side : {"side0", "side1", "side2"}) {
                const double l = num(tri, i, side);
                if (!(l > 0.5 * delta && l <= 2.0 * mu + 0.5 * delta)) area.pass = false;
            }
        }
        for (const auto& [delta, v] : per_delta) {
            if (!(v.first > 0.0)) area.pass = false;
            area.detail += "delta " + fmt(delta) + ": C2 " + fmt(v.first) + " over " + std::to_string(v.second) + "; ";
        }
        flags.push_back(area);

        if (has_table(report, "spanning_series")) {
            const Table sp = table(report, "spanning_series");
            const SeriesSummary s{"spanning", constants.at("beta").get<double>(), fit(sp, all_rows(sp), "r", "P").linear};
            std::vector<SeriesSummary> ts;
            for (const auto& [centre, rows] : by_centre(series)) {
                ts.push_back({"tube " + std::to_string(centre), info.at(centre).mu,
                              fit(series, rows, "T", "separated").linear});
            }
            Flag f{"bowen-combination", "h_top <= h_top(beta) + h*(beta) with both summands within tol", false, ""};
            try {
                const BowenVerdict v = bowen_combination(s, ts);
                f.pass = v.pass;
                f.detail = v.detail;
            } catch (const PreconditionError& e) {
                f.detail = e.what();
            }
            flags.push_back(f);
        }
    }
    return flags;
}

ojson flags_to_json(std::span<const Flag> flags) {
    ojson out = ojson::array();
    for (const auto& f : flags) {
        out.push_back({{"name", f.name}, {"anchor", f.anchor}, {"pass", f.pass}, {"detail", f.detail}});
    }
    return out;
}

int exit_code(std::span<const Flag> flags) {
    return std::all_of(flags.begin(), flags.end(), [](const Flag& f) { return f.pass; }) ? 0 : 1;
}

BowenVerdict bowen_combination(const SeriesSummary& spanning, std::span<const SeriesSummary> tubes, double tol) {
    for (const auto& t : tubes) {
        if (std::abs(t.beta - spanning.beta) > 1e-9 * std::max(1.0, std::abs(spanning.beta))) {
            throw PreconditionError("beta mismatch: spanning " + fmt(spanning.beta) + ", " + t.label + " " + fmt(t.beta));
        }
    }
    BowenVerdict v;
    std::ostringstream os;
    os << spanning.label << " slope " << fmt(spanning.slope_linear);
    if (spanning.slope_linear > tol) v.offending = spanning.label;
    for (const auto& t : tubes) {
        os << ", " << t.label << " slope " << fmt(t.slope_linear);
        if (t.slope_linear > tol && v.offending.empty()) v.offending = t.label;
    }
    v.pass = v.offending.empty();
    v.detail = os.str();
    if (!v.pass) v.detail = "summand above " + fmt(tol) + ": " + v.offending + " (" + v.detail + ")";
    return v;
}

void write_report(const ojson& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        out << report.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    }
    if (!report.contains("tables")) return;
    for (const auto& [name, t] : report["tables"].items()) {
        std::ofstream out(dir / (name + ".csv"), std::ios::binary);
        out << Table::from_json(t).to_csv();
        if (!out) throw std::runtime_error("cannot write " + (dir / (name + ".csv")).string());
    }
}

ojson read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report " + path.string());
    try {
        return ojson::parse(in);
    } catch (const ojson::parse_error& e) {
        throw ConfigError("report " + path.string() + " is not valid JSON: " + e.what());
    }
}

}  // namespace toruslab::harness
