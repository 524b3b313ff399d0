#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace toruslab::harness {

using ojson = nlohmann::ordered_json;

inline constexpr double kSlopeTolerance = 0.05;
inline constexpr double kSlopeLogTolerance = 1.3;

/// Column-major header plus row values; serialised as {"columns", "rows"}.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<ojson> row);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t size() const { return rows_.size(); }
    /// Throws std::out_of_range for an unknown column.
    std::size_t column(const std::string& name) const;
    const ojson& at(std::size_t row, const std::string& name) const { return rows_.at(row).at(column(name)); }

    ojson to_json() const;
    static Table from_json(const ojson& j);
    /// Comma separated, header row, LF line endings.
    std::string to_csv() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<ojson>> rows_;
};

struct Flag {
    std::string name;
    std::string anchor;  // the inequality being asserted
    bool pass = false;
    std::string detail;
};

/// Every flag is recomputed from report["constants"] and report["tables"].
std::vector<Flag> evaluate_flags(const ojson& report);
ojson flags_to_json(std::span<const Flag> flags);

/// 0 when every flag passes, 1 otherwise.
int exit_code(std::span<const Flag> flags);

struct SeriesSummary {
    std::string label;
    double beta = 0.0;
    double slope_linear = 0.0;
};

struct BowenVerdict {
    bool pass = false;
    std::string offending;  // empty on PASS
    std::string detail;
};

/// PASS iff the spanning slope and every tube slope are at most tol.
/// Throws PreconditionError when the reports disagree on beta.
BowenVerdict bowen_combination(const SeriesSummary& spanning, std::span<const SeriesSummary> tubes,
                               double tol = kSlopeTolerance);

/// report.json plus one CSV per table under dir.
void write_report(const ojson& report, const std::filesystem::path& dir);
ojson read_report(const std::filesystem::path& path);

}  // namespace toruslab::harness
