#include <fstream>
#include <sstream>

#include "temsa/corpus.hpp"

namespace temsa::corpus {

namespace {

char delimiter_for(ManifestSchema schema) { return schema == ManifestSchema::tsv ? '\t' : ','; }

struct Record {
    std::size_t row = 0;  // 1-based physical line where the record starts
    std::vector<std::string> fields;
};

// Splits delimited text into records, honouring double-quoted fields.
std::vector<Record> read_records(std::string_view content, char delim) {
    std::vector<Record> records;
    std::size_t line = 1;
    std::size_t i = 0;
    if (content.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    while (i < content.size()) {
        Record rec;
        rec.row = line;
        std::string field;
        bool in_quotes = false;
        bool field_was_quoted = false;
        bool done = false;
        while (!done) {
            if (i >= content.size()) {
                if (in_quotes)
                    throw Error("malformed manifest row " + std::to_string(rec.row) +
                                ": unterminated quoted field");
                rec.fields.push_back(std::move(field));
                done = true;
                break;
            }
            const char c = content[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < content.size() && content[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                continue;
            }
            if (c == '"' && field.empty() && !field_was_quoted) {
                in_quotes = true;
                field_was_quoted = true;
                ++i;
            } else if (c == delim) {
                rec.fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
                ++i;
            } else if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
                ++i;
            } else if (c == '\n') {
                rec.fields.push_back(std::move(field));
                ++line;
                ++i;
                done = true;
            } else {
                if (field_was_quoted)
                    throw Error("malformed manifest row " + std::to_string(rec.row) +
                                ": text after closing quote");
                field.push_back(c);
                ++i;
            }
        }
        // A blank physical line carries no record.
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        records.push_back(std::move(rec));
    }
    return records;
}

std::optional<Sentiment> parse_cell_label(const std::string& cell, std::size_t row, std::string_view column) {
    try {
        return parse_label(cell);
    } catch (const Error&) {
        throw Error("unknown label '" + cell + "' in column " + std::string(column) + " at manifest row " +
                    std::to_string(row));
    }
}

void append_field(std::string& out, std::string_view value, char delim) {
    const bool needs_quotes = value.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs_quotes) {
        out.append(value);
        return;
    }
    out.push_back('"');
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

std::string label_cell(const std::optional<Sentiment>& label) {
    return label ? std::string(to_string(*label)) : std::string{};
}

}  // namespace

ManifestSchema schema_for_path(std::string_view path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
    };
    return (ends_with(".tsv") || ends_with(".tab")) ? ManifestSchema::tsv : ManifestSchema::csv;
}

Dataset parse_manifest(std::string_view content, ManifestSchema schema, std::string dataset_name) {
    const char delim = delimiter_for(schema);
    const auto records = read_records(content, delim);
    if (records.empty()) throw Error("malformed manifest row 1: missing header");

    const auto& header = records.front();
    bool header_ok = header.fields.size() == kManifestColumns.size();
    for (std::size_t c = 0; header_ok && c < kManifestColumns.size(); ++c)
        header_ok = header.fields[c] == kManifestColumns[c];
    if (!header_ok)
        throw Error("malformed manifest row 1: header must be exactly "
                    "id,image_path,text,image_label,text_label,joint_label");

    std::vector<Sample> samples;
    samples.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != kManifestColumns.size())
            throw Error("malformed manifest row " + std::to_string(rec.row) + ": expected 6 fields, got " +
                        std::to_string(rec.fields.size()));
        Sample s;
        s.id = rec.fields[0];
        if (s.id.empty()) throw Error("malformed manifest row " + std::to_string(rec.row) + ": empty id");
        if (!rec.fields[1].empty()) s.image_ref = rec.fields[1];
        s.text = rec.fields[2];
        s.image_label = parse_cell_label(rec.fields[3], rec.row, "image_label");
        s.text_label = parse_cell_label(rec.fields[4], rec.row, "text_label");
        s.joint_label = parse_cell_label(rec.fields[5], rec.row, "joint_label");
        samples.push_back(std::move(s));
    }
    try {
        return Dataset(std::move(dataset_name), std::move(samples));
    } catch (const Error& e) {
        throw Error(std::string("malformed manifest: ") + e.what());
    }
}

Dataset load_manifest(const std::string& path, ManifestSchema schema, std::string dataset_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (dataset_name.empty()) {
        const auto slash = path.find_last_of('/');
        dataset_name = slash == std::string::npos ? path : path.substr(slash + 1);
        const auto dot = dataset_name.find_last_of('.');
        if (dot != std::string::npos && dot > 0) dataset_name.resize(dot);
    }
    return parse_manifest(buffer.str(), schema, std::move(dataset_name));
}

std::string format_manifest(const Dataset& d, ManifestSchema schema) {
    const char delim = delimiter_for(schema);
    std::string out;
    for (std::size_t c = 0; c < kManifestColumns.size(); ++c) {
        if (c) out.push_back(delim);
        out.append(kManifestColumns[c]);
    }
    out.push_back('\n');
    for (const auto& s : d.samples()) {
        append_field(out, s.id, delim);
        out.push_back(delim);
        append_field(out, s.image_ref.value_or(""), delim);
        out.push_back(delim);
        append_field(out, s.text, delim);
        out.push_back(delim);
        out += label_cell(s.image_label);
        out.push_back(delim);
        out += label_cell(s.text_label);
        out.push_back(delim);
        out += label_cell(s.joint_label);
        out.push_back('\n');
    }
    return out;
}

void save_manifest(const Dataset& d, const std::string& path, ManifestSchema schema) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest '" + path + "'");
    out << format_manifest(d, schema);
    if (!out) throw Error("failed writing manifest '" + path + "'");
}

}  // namespace temsa::corpus
