#include "temsa/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace temsa::eval {

using nlohmann::json;

bool PairedTest::operator==(const PairedTest& o) const {
    return a == o.a && b == o.b && result == o.result && note == o.note;
}

bool ResultRecord::operator==(const ResultRecord& o) const {
    return experiment == o.experiment && dataset == o.dataset && model == o.model && metrics == o.metrics &&
           wilcoxon == o.wilcoxon && config == o.config && ids == o.ids && predictions == o.predictions &&
           golds == o.golds && history == o.history && wall_clock_seconds == o.wall_clock_seconds &&
           hashes == o.hashes;
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json to_json(const WilcoxonResult& r) {
    return {{"statistic", r.statistic},
            {"w_plus", r.w_plus},
            {"w_minus", r.w_minus},
            {"n_effective", r.n_effective},
            {"p_value", r.p_value},
            {"method", std::string(to_string(r.method))},
            {"alpha", r.alpha},
            {"significant", r.significant}};
}

WilcoxonResult wilcoxon_from_json(const json& j) {
    WilcoxonResult r;
    r.statistic = j.at("statistic").get<double>();
    r.w_plus = j.at("w_plus").get<double>();
    r.w_minus = j.at("w_minus").get<double>();
    r.n_effective = j.at("n_effective").get<int>();
    r.p_value = j.at("p_value").get<double>();
    const auto method = j.at("method").get<std::string>();
    if (method == "exact")
        r.method = WilcoxonMethod::exact;
    else if (method == "normal-approximation")
        r.method = WilcoxonMethod::normal_approximation;
    else
        throw Error("unknown Wilcoxon method '" + method + "'");
    r.alpha = j.at("alpha").get<double>();
    r.significant = j.at("significant").get<bool>();
    return r;
}

json to_json(const MetricSet& m) {
    return {{"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"averaging", std::string(to_string(m.averaging))}};
}

MetricSet metrics_from_json(const json& j) {
    MetricSet m;
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.averaging = parse_averaging(j.value("averaging", std::string("macro")));
    return m;
}

json to_json(const PairedTest& t) {
    json j = {{"a", t.a}, {"b", t.b}};
    if (t.result) j.update(eval::to_json(*t.result));
    if (!t.note.empty()) j["note"] = t.note;
    return j;
}

namespace {

PairedTest paired_from_json(const json& j) {
    PairedTest t;
    t.a = j.at("a").get<std::string>();
    t.b = j.at("b").get<std::string>();
    if (j.contains("p_value")) t.result = wilcoxon_from_json(j);
    t.note = j.value("note", std::string());
    return t;
}

json labels_json(const std::vector<Sentiment>& xs) {
    json out = json::array();
    for (auto s : xs) out.push_back(std::string(to_string(s)));
    return out;
}

std::vector<Sentiment> labels_from_json(const json& j, const char* field) {
    std::vector<Sentiment> out;
    for (const auto& v : j) {
        auto s = parse_label(v.get<std::string>());
        if (!s) throw Error(std::string("record field '") + field + "' contains an empty label");
        out.push_back(*s);
    }
    return out;
}

}  // namespace

json to_json(const ResultRecord& r) {
    json tests = json::array();
    for (const auto& t : r.wilcoxon) tests.push_back(to_json(t));
    return {{"schema_version", kResultSchemaVersion},
            {"experiment", r.experiment},
            {"dataset", r.dataset},
            {"model", r.model},
            {"metrics", to_json(r.metrics)},
            {"wilcoxon", tests},
            {"config", r.config},
            {"ids", r.ids},
            {"predictions", labels_json(r.predictions)},
            {"golds", labels_json(r.golds)},
            {"history", r.history},
            {"wall_clock_seconds", r.wall_clock_seconds},
            {"hashes", r.hashes}};
}

ResultRecord record_from_json(const json& j) {
    const int version = j.value("schema_version", -1);
    if (version != kResultSchemaVersion)
        throw Error("result record has schema_version " + std::to_string(version) + ", expected " +
                    std::to_string(kResultSchemaVersion));
    ResultRecord r;
    try {
        r.experiment = j.at("experiment").get<int>();
        r.dataset = j.at("dataset").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.metrics = metrics_from_json(j.at("metrics"));
        for (const auto& t : j.value("wilcoxon", json::array())) r.wilcoxon.push_back(paired_from_json(t));
        r.config = j.value("config", json::object());
        r.ids = j.value("ids", std::vector<std::string>{});
        r.predictions = labels_from_json(j.value("predictions", json::array()), "predictions");
        r.golds = labels_from_json(j.value("golds", json::array()), "golds");
        r.history = j.value("history", json::array());
        r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
        r.hashes = j.value("hashes", std::map<std::string, std::string>{});
    } catch (const json::exception& e) {
        throw Error(std::string("malformed result record: ") + e.what());
    }
    if (r.predictions.size() != r.golds.size() || r.ids.size() != r.golds.size())
        throw Error("result record has " + std::to_string(r.ids.size()) + " ids, " +
                    std::to_string(r.predictions.size()) + " predictions and " + std::to_string(r.golds.size()) +
                    " gold labels");
    return r;
}

std::string persist(const ResultRecord& r, const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write result record '" + path + "'");
    out << to_json(r).dump(2) << "\n";
    if (!out) throw Error("failed writing result record '" + path + "'");
    return path;
}

ResultRecord load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open result record '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("result record '" + path + "' is not valid JSON: " + e.what());
    }
    return record_from_json(j);
}

PairedTest prediction_vs_gold(const std::vector<Sentiment>& predictions, const std::vector<Sentiment>& golds,
                              double alpha) {
    PairedTest t{"predicted", "gold", std::nullopt, ""};
    std::vector<double> x, y;
    for (auto s : predictions) x.push_back(ordinal_code(s));
    for (auto s : golds) y.push_back(ordinal_code(s));
    try {
        t.result = wilcoxon_signed_rank(x, y, alpha);
    } catch (const Error& e) {
        t.note = e.what();
    }
    return t;
}

std::string experiment_label(int experiment, const std::string& model) {
    switch (experiment) {
        case 1: return "Image (" + model + ")";
        case 2: return "Text (" + model + ")";
        case 3: return "TEMS (" + model + ")";
        case 4: return "TEMS single-object (" + model + ")";
        default: return "Experiment " + std::to_string(experiment) + " (" + model + ")";
    }
}

std::vector<std::string> ComparisonReport::datasets() const {
    std::vector<std::string> out;
    for (const auto& r : rows)
        if (std::find(out.begin(), out.end(), r.dataset) == out.end()) out.push_back(r.dataset);
    return out;
}

json ComparisonReport::to_json() const {
    json j = {{"averaging", std::string(to_string(averaging))}};
    json rs = json::array(), ts = json::array(), ms = json::array();
    for (const auto& r : rows)
        rs.push_back({{"experiment", r.experiment},
                      {"dataset", r.dataset},
                      {"model", r.model},
                      {"label", r.label},
                      {"metrics", eval::to_json(r.metrics)}});
    for (const auto& t : tests) {
        json e = eval::to_json(t.test);
        e["dataset"] = t.dataset;
        e["row_a"] = t.row_a;
        e["row_b"] = t.row_b;
        ts.push_back(e);
    }
    for (const auto& m : means)
        ms.push_back({{"experiment", m.experiment},
                      {"dataset", m.dataset},
                      {"count", m.count},
                      {"mean", eval::to_json(m.mean)}});
    j["rows"] = rs;
    j["wilcoxon"] = ts;
    j["group_means"] = ms;
    return j;
}

std::string ComparisonReport::table_csv() const {
    std::ostringstream out;
    out << "# averaging: " << to_string(averaging) << "\n";
    out << "Dataset,Model,Acc,Pre,F1,Rec\n";
    for (const auto& r : rows)
        out << r.dataset << "," << r.label << "," << format_number(r.metrics.accuracy) << ","
            << format_number(r.metrics.precision) << "," << format_number(r.metrics.f1) << ","
            << format_number(r.metrics.recall) << "\n";
    return out.str();
}

namespace {

std::vector<double> absolute_errors(const ResultRecord& r) {
    std::vector<double> out;
    for (std::size_t i = 0; i < r.golds.size(); ++i)
        out.push_back(std::abs(ordinal_code(r.predictions[i]) - ordinal_code(r.golds[i])));
    return out;
}

bool same_ids(const ResultRecord& a, const ResultRecord& b) {
    return !a.ids.empty() && a.ids == b.ids;
}

}  // namespace

ComparisonReport compare_experiments(const std::vector<ResultRecord>& records,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& requested,
                                     double alpha) {
    if (records.empty()) throw Error("compare: no result records");
    ComparisonReport report;
    report.averaging = records.front().metrics.averaging;
    for (const auto& r : records)
        if (r.metrics.averaging != report.averaging)
            throw Error("compare: records mix macro and weighted averaging");

    // Stable grouping: dataset in first-seen order, then experiment id.
    std::vector<std::string> datasets;
    for (const auto& r : records)
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto dataset_rank = [&](const std::string& d) {
        return std::find(datasets.begin(), datasets.end(), d) - datasets.begin();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto da = dataset_rank(records[a].dataset), db = dataset_rank(records[b].dataset);
        if (da != db) return da < db;
        return records[a].experiment < records[b].experiment;
    });
    std::vector<std::size_t> row_of(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& r = records[order[i]];
        row_of[order[i]] = i;
        report.rows.push_back({r.experiment, r.dataset, r.model, experiment_label(r.experiment, r.model), r.metrics});
    }

    auto run_test = [&](std::size_t a, std::size_t b) {
        const auto& ra = records[a];
        const auto& rb = records[b];
        RowTest t;
        t.dataset = ra.dataset;
        t.row_a = row_of[a];
        t.row_b = row_of[b];
        t.test.a = report.rows[t.row_a].label;
        t.test.b = report.rows[t.row_b].label;
        try {
            t.test.result = wilcoxon_signed_rank(absolute_errors(ra), absolute_errors(rb), alpha);
        } catch (const Error& e) {
            t.test.note = e.what();
        }
        report.tests.push_back(std::move(t));
    };

    if (requested.empty()) {
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                const auto& a = records[order[i]];
                const auto& b = records[order[j]];
                if (a.dataset != b.dataset) continue;
                if (same_ids(a, b))
                    run_test(order[i], order[j]);
                else
                    log_info("compare: '" + experiment_label(a.experiment, a.model) + "' and '" +
                             experiment_label(b.experiment, b.model) + "' use different test splits; not tested");
            }
    } else {
        for (auto [a, b] : requested) {
            if (a >= records.size() || b >= records.size() || a == b)
                throw Error("compare: invalid record pair (" + std::to_string(a) + ", " + std::to_string(b) + ")");
            if (!same_ids(records[a], records[b]))
                throw Error("compare: records " + std::to_string(a) + " and " + std::to_string(b) +
                            " were evaluated on different test-split ids");
            run_test(a, b);
        }
    }

    for (const auto& d : datasets) {
        std::set<int> experiments;
        for (const auto& r : report.rows)
            if (r.dataset == d) experiments.insert(r.experiment);
        for (int e : experiments) {
            GroupMean g;
            g.experiment = e;
            g.dataset = d;
            g.mean.averaging = report.averaging;
            for (const auto& r : report.rows)
                if (r.dataset == d && r.experiment == e) {
                    g.mean.accuracy += r.metrics.accuracy;
                    g.mean.precision += r.metrics.precision;
                    g.mean.recall += r.metrics.recall;
                    g.mean.f1 += r.metrics.f1;
                    ++g.count;
                }
            const double n = static_cast<double>(g.count);
            g.mean.accuracy /= n;
            g.mean.precision /= n;
            g.mean.recall /= n;
            g.mean.f1 /= n;
            report.means.push_back(g);
        }
    }
    return report;
}

}  // namespace temsa::eval
