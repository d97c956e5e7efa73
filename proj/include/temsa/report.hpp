#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "temsa/eval.hpp"

namespace temsa::eval {

inline constexpr int kResultSchemaVersion = 1;

/// One signed-rank test between two labelled per-sample sequences. A
/// degenerate comparison (all differences zero) has no result and a note.
struct PairedTest {
    std::string a;
    std::string b;
    std::optional<WilcoxonResult> result;
    std::string note;

    bool operator==(const PairedTest&) const;
};

/// Outcome of one experiment run; also the report file format.
struct ResultRecord {
    int experiment = 0;
    std::string dataset;
    std::string model;
    MetricSet metrics;
    /// Prediction vs gold ordinal codes (negative=0, neutral=1, positive=2).
    std::vector<PairedTest> wilcoxon;
    /// Full configuration snapshot; enough to rerun.
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> ids;
    std::vector<Sentiment> predictions;
    std::vector<Sentiment> golds;
    /// Per-epoch training loss/accuracy.
    nlohmann::json history = nlohmann::json::array();
    double wall_clock_seconds = 0.0;
    /// Artifact fingerprints (manifest, cache, checkpoint, ...).
    std::map<std::string, std::string> hashes;

    bool operator==(const ResultRecord&) const;
};

nlohmann::json to_json(const WilcoxonResult& r);
WilcoxonResult wilcoxon_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricSet& m);
nlohmann::json to_json(const PairedTest& t);
MetricSet metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResultRecord& r);
/// Throws on a schema_version other than kResultSchemaVersion.
ResultRecord record_from_json(const nlohmann::json& j);

/// Writes the record as JSON; returns the path.
std::string persist(const ResultRecord& r, const std::string& path);
ResultRecord load_record(const std::string& path);

/// Signed-rank test of predicted vs gold ordinal codes for one record.
PairedTest prediction_vs_gold(const std::vector<Sentiment>& predictions, const std::vector<Sentiment>& golds,
                              double alpha = 0.05);

/// Display name of an experiment/model pair, e.g. "TEMS (bilstm)".
std::string experiment_label(int experiment, const std::string& model);

struct ComparisonRow {
    int experiment = 0;
    std::string dataset;
    std::string model;
    std::string label;
    MetricSet metrics;
};

/// Test between two rows on the per-sample absolute ordinal error.
struct RowTest {
    std::string dataset;
    std::size_t row_a = 0;
    std::size_t row_b = 0;
    PairedTest test;
};

struct GroupMean {
    int experiment = 0;
    std::string dataset;
    MetricSet mean;
    std::size_t count = 0;
};

struct ComparisonReport {
    Averaging averaging = Averaging::macro;
    std::vector<ComparisonRow> rows;
    std::vector<RowTest> tests;
    std::vector<GroupMean> means;

    bool empty() const { return rows.empty(); }
    std::vector<std::string> datasets() const;
    nlohmann::json to_json() const;
    /// `Dataset,Model,Acc,Pre,F1,Rec`, one row per record, values verbatim.
    std::string table_csv() const;
};

/// Rows grouped by dataset then experiment. Without `requested`, every pair
/// of records on the same dataset whose test ids coincide is tested; with it,
/// only the listed record index pairs are, and differing ids throw.
ComparisonReport compare_experiments(const std::vector<ResultRecord>& records,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& requested = {},
                                     double alpha = 0.05);

/// Writes `<dataset>_comparison.svg` per dataset and `baseline_comparison.svg`.
/// Returns the written paths in that order.
std::vector<std::string> emit_plots(const ComparisonReport& report, const std::string& out_dir);

/// Shortest decimal text that reads back as the same double.
std::string format_number(double v);

}  // namespace temsa::eval
