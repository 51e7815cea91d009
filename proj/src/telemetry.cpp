#include "bcas/telemetry.hpp"

#include "bcas/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace bcas {

using nlohmann::json;

PriceSheet PriceSheet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open price sheet: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    PriceSheet prices;
    prices.input_per_million = j.value("input_per_million", 0.0);
    prices.output_per_million = j.value("output_per_million", 0.0);
    prices.per_search = j.value("per_search", 0.0);
    prices.validate();
    return prices;
}

void PriceSheet::validate() const {
    if (input_per_million < 0.0 || output_per_million < 0.0 || per_search < 0.0) {
        throw ConfigError("price sheet: prices must be >= 0");
    }
}

double trajectory_cost(std::uint64_t tokens_in, std::uint64_t tokens_out,
                       std::uint32_t searches_used, const PriceSheet& prices) {
    return static_cast<double>(tokens_in) * prices.input_per_million / 1e6 +
           static_cast<double>(tokens_out) * prices.output_per_million / 1e6 +
           static_cast<double>(searches_used) * prices.per_search;
}

QuestionRecord make_record(const std::string& sample_id, const std::string& config_id,
                           const TrajectoryState& trajectory, const GradeResult& grade,
                           const PriceSheet& prices, const std::string& dataset_digest,
                           std::uint64_t started_at_ms, std::uint64_t finished_at_ms) {
    QuestionRecord record;
    record.sample_id = sample_id;
    record.config_id = config_id;
    record.searches_used = trajectory.ledger.searches_used();
    record.tokens_in = trajectory.ledger.prompt_tokens_used();
    record.tokens_out = trajectory.ledger.completion_tokens_used();
    record.early_stop = trajectory.early_stop;
    record.verdict = grade.verdict;
    record.cost = trajectory_cost(record.tokens_in, record.tokens_out, record.searches_used, prices);
    record.outcome = trajectory.outcome.has_value() ? outcome_tag(*trajectory.outcome) : "failed";
    record.answer = trajectory.outcome.has_value() ? outcome_answer(*trajectory.outcome) : "";
    record.dataset_digest = dataset_digest;
    record.started_at_ms = started_at_ms;
    record.finished_at_ms = finished_at_ms;
    record.call_usages = trajectory.call_usages;
    if (trajectory.ledger.overflowed()) {
        record.flags.push_back("token_overflow");
    }
    return record;
}

// ---------------------------------------------------------------------------
// JSONL serialization (keys are sorted by the json object, so records with
// identical contents serialize byte-identically)

std::string record_to_jsonl(const QuestionRecord& record) {
    json j;
    j["schema_version"] = kTelemetrySchemaVersion;
    j["sample_id"] = record.sample_id;
    j["config_id"] = record.config_id;
    j["searches_used"] = record.searches_used;
    j["tokens_in"] = record.tokens_in;
    j["tokens_out"] = record.tokens_out;
    j["early_stop"] = record.early_stop;
    if (record.verdict.has_value()) {
        json v;
        v["correct"] = record.verdict->correct;
        v["judge_id"] = record.verdict->judge_id;
        if (record.verdict->rationale.has_value()) {
            v["rationale"] = *record.verdict->rationale;
        }
        j["verdict"] = v;
    } else {
        j["verdict"] = nullptr;
    }
    j["cost"] = record.cost;
    j["outcome"] = record.outcome;
    j["answer"] = record.answer;
    j["dataset_digest"] = record.dataset_digest;
    j["started_at_ms"] = record.started_at_ms;
    j["finished_at_ms"] = record.finished_at_ms;
    j["flags"] = record.flags;
    json usages = json::array();
    for (const TokenUsage& usage : record.call_usages) {
        usages.push_back(json::array({usage.prompt_tokens, usage.completion_tokens}));
    }
    j["call_usages"] = usages;
    return j.dump();
}

QuestionRecord record_from_jsonl(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("telemetry record: ") + e.what());
    }
    try {
        QuestionRecord record;
        record.sample_id = j.at("sample_id").get<std::string>();
        record.config_id = j.at("config_id").get<std::string>();
        record.searches_used = j.at("searches_used").get<std::uint32_t>();
        record.tokens_in = j.at("tokens_in").get<std::uint64_t>();
        record.tokens_out = j.at("tokens_out").get<std::uint64_t>();
        record.early_stop = j.at("early_stop").get<bool>();
        if (!j.at("verdict").is_null()) {
            Verdict verdict;
            verdict.correct = j.at("verdict").at("correct").get<bool>();
            verdict.judge_id = j.at("verdict").value("judge_id", "");
            if (j.at("verdict").contains("rationale")) {
                verdict.rationale = j.at("verdict").at("rationale").get<std::string>();
            }
            record.verdict = verdict;
        }
        record.cost = j.at("cost").get<double>();
        record.outcome = j.at("outcome").get<std::string>();
        record.answer = j.value("answer", "");
        record.dataset_digest = j.value("dataset_digest", "");
        record.started_at_ms = j.value("started_at_ms", 0ull);
        record.finished_at_ms = j.value("finished_at_ms", 0ull);
        record.flags = j.value("flags", std::vector<std::string>{});
        if (j.contains("call_usages")) {
            for (const json& usage : j.at("call_usages")) {
                record.call_usages.push_back(
                    TokenUsage{usage.at(0).get<std::uint64_t>(), usage.at(1).get<std::uint64_t>()});
            }
        }
        return record;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("telemetry record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// RecordLog

RecordLog::RecordLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
}

void RecordLog::append(const QuestionRecord& record) {
    const std::string line = record_to_jsonl(record);
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw IoError("cannot append to record log: " + path_.string());
    }
    out << line << '\n';
    out.flush();
}

std::vector<QuestionRecord> RecordLog::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<QuestionRecord> records;
    if (!in) {
        return records;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            records.push_back(record_from_jsonl(line));
        } catch (const SchemaError&) {
            // A truncated tail from a crash is survivable; resume rewrites it.
            break;
        }
    }
    return records;
}

std::set<std::pair<std::string, std::string>>
RecordLog::completed_keys(const std::filesystem::path& path) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const QuestionRecord& record : read(path)) {
        keys.emplace(record.sample_id, record.config_id);
    }
    return keys;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (const char ch : field) {
        if (ch == '"') {
            out += "\"\"";
        } else {
            out.push_back(ch);
        }
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

constexpr std::string_view kCsvHeader =
    "schema_version,sample_id,config_id,searches_used,tokens_in,tokens_out,early_stop,verdict,"
    "judge_id,rationale,cost,outcome,answer,dataset_digest,started_at_ms,finished_at_ms,flags,"
    "call_usages";

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const std::string& flag : flags) {
        if (!out.empty()) {
            out.push_back(';');
        }
        out += flag;
    }
    return out;
}

std::string join_usages(const std::vector<TokenUsage>& usages) {
    std::string out;
    for (const TokenUsage& usage : usages) {
        if (!out.empty()) {
            out.push_back(';');
        }
        out += std::to_string(usage.prompt_tokens) + ":" + std::to_string(usage.completion_tokens);
    }
    return out;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    if (text.empty()) {
        return parts;
    }
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(text.substr(pos));
            break;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + 1;
    }
    return parts;
}

std::string double_repr(double value) {
    return json(value).dump();   // shortest round-trip representation
}

} // namespace

void export_records(std::span<const QuestionRecord> records, const std::filesystem::path& path,
                    ExportFormat format) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write export: " + path.string());
    }
    if (format == ExportFormat::Jsonl) {
        for (const QuestionRecord& record : records) {
            out << record_to_jsonl(record) << '\n';
        }
        return;
    }
    out << kCsvHeader << '\n';
    for (const QuestionRecord& record : records) {
        out << kTelemetrySchemaVersion << ',' << csv_escape(record.sample_id) << ','
            << csv_escape(record.config_id) << ',' << record.searches_used << ','
            << record.tokens_in << ',' << record.tokens_out << ','
            << (record.early_stop ? "true" : "false") << ','
            << (record.graded() ? (record.verdict->correct ? "correct" : "incorrect") : "ungraded")
            << ',' << csv_escape(record.graded() ? record.verdict->judge_id : "") << ','
            << csv_escape(record.graded() && record.verdict->rationale.has_value()
                              ? *record.verdict->rationale
                              : "")
            << ',' << double_repr(record.cost) << ',' << csv_escape(record.outcome) << ','
            << csv_escape(record.answer) << ',' << csv_escape(record.dataset_digest) << ','
            << record.started_at_ms << ',' << record.finished_at_ms << ','
            << csv_escape(join_flags(record.flags)) << ','
            << csv_escape(join_usages(record.call_usages)) << '\n';
    }
}

std::vector<QuestionRecord> import_records(const std::filesystem::path& path,
                                           ExportFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open export: " + path.string());
    }
    std::vector<QuestionRecord> records;
    std::string line;
    if (format == ExportFormat::Jsonl) {
        while (std::getline(in, line)) {
            if (!line.empty()) {
                records.push_back(record_from_jsonl(line));
            }
        }
        return records;
    }

    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue;   // header
        }
        const auto fields = csv_split(line);
        if (fields.size() != 18) {
            throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 18 CSV fields, got " + std::to_string(fields.size()));
        }
        QuestionRecord record;
        record.sample_id = fields[1];
        record.config_id = fields[2];
        record.searches_used = static_cast<std::uint32_t>(std::stoul(fields[3]));
        record.tokens_in = std::stoull(fields[4]);
        record.tokens_out = std::stoull(fields[5]);
        record.early_stop = fields[6] == "true";
        if (fields[7] != "ungraded") {
            Verdict verdict;
            verdict.correct = fields[7] == "correct";
            verdict.judge_id = fields[8];
            if (!fields[9].empty()) {
                verdict.rationale = fields[9];
            }
            record.verdict = verdict;
        }
        record.cost = std::stod(fields[10]);
        record.outcome = fields[11];
        record.answer = fields[12];
        record.dataset_digest = fields[13];
        record.started_at_ms = std::stoull(fields[14]);
        record.finished_at_ms = std::stoull(fields[15]);
        record.flags = split_on(fields[16], ';');
        for (const std::string& pair : split_on(fields[17], ';')) {
            const std::size_t colon = pair.find(':');
            if (colon == std::string::npos) {
                throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad call_usages field");
            }
            record.call_usages.push_back(TokenUsage{std::stoull(pair.substr(0, colon)),
                                                    std::stoull(pair.substr(colon + 1))});
        }
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace bcas
