#include "bcas/runner.hpp"

#include "bcas/engine.hpp"
#include "bcas/errors.hpp"
#include "bcas/hash.hpp"
#include "bcas/retrieval/ingest.hpp"
#include "bcas/strings.hpp"
#include "bcas/telemetry.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

namespace bcas {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config plumbing

namespace {

std::string to_string(BackendSpec::Kind kind) {
    return kind == BackendSpec::Kind::Http ? "http" : "scripted";
}

std::string to_string(JudgeSpec::Kind kind) {
    switch (kind) {
        case JudgeSpec::Kind::ExactMatch: return "exact_match";
        case JudgeSpec::Kind::Http: return "http";
        case JudgeSpec::Kind::Scripted: return "scripted";
    }
    return "exact_match";
}

bool parse_bool(std::string_view value, std::string_view key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: " + std::string(key) + " must be a boolean, got \"" +
                      std::string(value) + "\"");
}

std::uint64_t parse_u64(std::string_view value, std::string_view key) {
    try {
        std::size_t used = 0;
        const std::uint64_t out = std::stoull(std::string(value), &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: " + std::string(key) + " must be an integer, got \"" +
                          std::string(value) + "\"");
    }
}

} // namespace

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) {
        throw ConfigError("config: dataset is required");
    }
    if (collection.empty()) {
        throw ConfigError("config: collection is required");
    }
    BudgetConfig budget{max_searches, max_total_tokens};
    budget.validate();
    if (reflection_interval < 1) {
        throw ConfigError("config: reflection_interval must be >= 1");
    }
    if (max_turns < 1) {
        throw ConfigError("config: max_turns must be >= 1");
    }
    if (concurrency < 1) {
        throw ConfigError("config: concurrency must be >= 1");
    }
    if (backend.kind == BackendSpec::Kind::Http && backend.endpoint.empty()) {
        throw ConfigError("config: backend_endpoint is required for the http backend");
    }
    if (backend.kind == BackendSpec::Kind::Scripted && backend.script_path.empty()) {
        throw ConfigError("config: backend_script is required for the scripted backend");
    }
    if (judge.kind == JudgeSpec::Kind::Http && judge.endpoint.empty()) {
        throw ConfigError("config: judge_endpoint is required for the http judge");
    }
    if (judge.kind == JudgeSpec::Kind::Scripted && judge.script_path.empty()) {
        throw ConfigError("config: judge_script is required for the scripted judge");
    }
    if (mode == retrieval::SearchMode::HS_RR && reranker_spec.empty()) {
        throw ConfigError("config: reranker is required for mode HS_RR");
    }
    if (output_dir.empty() || index_dir.empty()) {
        throw ConfigError("config: output_dir and index_dir are required");
    }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::canonical_items() const {
    return {
        {"backend", to_string(backend.kind)},
        {"backend_endpoint", backend.endpoint},
        {"backend_model", backend.model},
        {"backend_script", backend.script_path},
        {"collection", collection},
        {"concurrency", std::to_string(concurrency)},
        {"dataset", dataset_path},
        {"embedder", embedder_spec},
        {"format", bcas::to_string(dataset_format)},
        {"index_dir", index_dir},
        {"judge", to_string(judge.kind)},
        {"judge_endpoint", judge.endpoint},
        {"judge_model", judge.model},
        {"judge_script", judge.script_path},
        {"max_searches", max_searches.has_value() ? std::to_string(*max_searches) : "unlimited"},
        {"max_total_tokens", std::to_string(max_total_tokens)},
        {"max_turns", std::to_string(max_turns)},
        {"mode", retrieval::to_string(mode)},
        {"n_samples", std::to_string(n_samples)},
        {"output_dir", output_dir},
        {"preplan", preplan ? "true" : "false"},
        {"price_sheet", price_sheet_path},
        {"reflection", reflection ? "true" : "false"},
        {"reflection_interval", std::to_string(reflection_interval)},
        {"reranker", reranker_spec},
        {"seed", std::to_string(seed)},
        {"session_log", session_log},
    };
}

std::string ExperimentConfig::digest() const {
    std::string canonical;
    for (const auto& [key, value] : canonical_items()) {
        canonical += key;
        canonical += '=';
        canonical += value;
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

std::string ExperimentConfig::config_id() const {
    return digest().substr(0, 12);
}

RawConfig read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    RawConfig raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = trim_view(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        set_raw(raw, trim_view(trimmed.substr(0, eq)), trim_view(trimmed.substr(eq + 1)));
    }
    return raw;
}

void set_raw(RawConfig& raw, std::string_view key, std::string_view value) {
    for (auto& [existing_key, existing_value] : raw) {
        if (existing_key == key) {
            existing_value = std::string(value);
            return;
        }
    }
    raw.emplace_back(std::string(key), std::string(value));
}

ExperimentConfig config_from_raw(const RawConfig& raw) {
    ExperimentConfig config;
    for (const auto& [key, value] : raw) {
        if (key == "dataset") config.dataset_path = value;
        else if (key == "format") config.dataset_format = dataset_format_from_string(value);
        else if (key == "collection") config.collection = value;
        else if (key == "mode") config.mode = retrieval::search_mode_from_string(value);
        else if (key == "max_searches") {
            if (value == "unlimited") {
                config.max_searches.reset();
            } else {
                config.max_searches = static_cast<std::uint32_t>(parse_u64(value, key));
            }
        }
        else if (key == "max_total_tokens") config.max_total_tokens = parse_u64(value, key);
        else if (key == "preplan") config.preplan = parse_bool(value, key);
        else if (key == "reflection") config.reflection = parse_bool(value, key);
        else if (key == "reflection_interval")
            config.reflection_interval = static_cast<std::uint32_t>(parse_u64(value, key));
        else if (key == "max_turns") config.max_turns = static_cast<std::uint32_t>(parse_u64(value, key));
        else if (key == "backend") {
            if (value == "http") config.backend.kind = BackendSpec::Kind::Http;
            else if (value == "scripted") config.backend.kind = BackendSpec::Kind::Scripted;
            else throw ConfigError("config: backend must be http or scripted");
        }
        else if (key == "backend_endpoint") config.backend.endpoint = value;
        else if (key == "backend_model") config.backend.model = value;
        else if (key == "backend_script") config.backend.script_path = value;
        else if (key == "judge") {
            if (value == "exact_match") config.judge.kind = JudgeSpec::Kind::ExactMatch;
            else if (value == "http") config.judge.kind = JudgeSpec::Kind::Http;
            else if (value == "scripted") config.judge.kind = JudgeSpec::Kind::Scripted;
            else throw ConfigError("config: judge must be exact_match, http or scripted");
        }
        else if (key == "judge_endpoint") config.judge.endpoint = value;
        else if (key == "judge_model") config.judge.model = value;
        else if (key == "judge_script") config.judge.script_path = value;
        else if (key == "n_samples") config.n_samples = parse_u64(value, key);
        else if (key == "seed") config.seed = parse_u64(value, key);
        else if (key == "concurrency") config.concurrency = static_cast<std::uint32_t>(parse_u64(value, key));
        else if (key == "output_dir") config.output_dir = value;
        else if (key == "price_sheet") config.price_sheet_path = value;
        else if (key == "index_dir") config.index_dir = value;
        else if (key == "embedder") config.embedder_spec = value;
        else if (key == "reranker") config.reranker_spec = value;
        else if (key == "session_log") config.session_log = value;
        else throw ConfigError("config: unknown key \"" + key + "\"");
    }
    config.validate();
    return config;
}

namespace {

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const std::size_t comma = value.find(',', pos);
        if (comma == std::string_view::npos) {
            parts.push_back(trim(value.substr(pos)));
            break;
        }
        parts.push_back(trim(value.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return parts;
}

} // namespace

std::vector<ExperimentConfig> expand_grid(const RawConfig& raw) {
    std::vector<std::string> searches{""};
    std::vector<std::string> tokens{""};
    for (const auto& [key, value] : raw) {
        if (key == "max_searches") searches = split_list(value);
        if (key == "max_total_tokens") tokens = split_list(value);
    }
    std::vector<ExperimentConfig> grid;
    for (const std::string& search_value : searches) {
        for (const std::string& token_value : tokens) {
            RawConfig combo = raw;
            if (!search_value.empty()) {
                set_raw(combo, "max_searches", search_value);
            }
            if (!token_value.empty()) {
                set_raw(combo, "max_total_tokens", token_value);
            }
            grid.push_back(config_from_raw(combo));
        }
    }
    return grid;
}

std::unique_ptr<retrieval::Embedder> make_embedder(std::string_view spec) {
    if (spec.empty() || spec == "none") {
        return nullptr;
    }
    if (spec == "hash") {
        return std::make_unique<retrieval::HashEmbedder>();
    }
    if (starts_with(spec, "http:")) {
        retrieval::HttpEmbedderConfig config;
        config.endpoint = std::string(spec.substr(5));
        return std::make_unique<retrieval::HttpEmbedder>(config);
    }
    throw ConfigError("unknown embedder spec: " + std::string(spec));
}

std::unique_ptr<retrieval::Reranker> make_reranker(std::string_view spec) {
    if (spec.empty() || spec == "none") {
        return nullptr;
    }
    if (starts_with(spec, "http:")) {
        retrieval::HttpRerankerConfig config;
        config.endpoint = std::string(spec.substr(5));
        return std::make_unique<retrieval::HttpReranker>(config);
    }
    throw ConfigError("unknown reranker spec: " + std::string(spec));
}

retrieval::Index ensure_index(const ExperimentConfig& config, const LoadedDataset& dataset,
                              retrieval::Embedder* embedder) {
    const std::filesystem::path dir = std::filesystem::path(config.index_dir) / config.collection;
    const bool needs_dense = config.mode != retrieval::SearchMode::BM25;

    if (auto loaded = retrieval::Index::load(dir); loaded.has_value()) {
        const bool dense_ok = !needs_dense ||
                              (loaded->has_embeddings() &&
                               (embedder == nullptr || loaded->embedder_id() == embedder->id()));
        if (loaded->collection() == config.collection && dense_ok) {
            return std::move(*loaded);
        }
    }

    if (dataset.documents.empty()) {
        throw ConfigError("collection \"" + config.collection +
                          "\" has no persisted index and the dataset carries no documents; "
                          "build it with the index command first");
    }
    retrieval::Index index = retrieval::build_index(config.collection, dataset.documents, {},
                                                    needs_dense || embedder != nullptr ? embedder
                                                                                       : nullptr);
    index.save(dir);
    return index;
}

// ---------------------------------------------------------------------------
// Run orchestration

namespace {

/// Per-trajectory search adapter: forwards to the shared pipeline and keeps
/// the flags that belong in this sample's record.
class TrackingSearch : public SearchService {
public:
    explicit TrackingSearch(retrieval::Searcher& inner) : inner_(inner) {}

    std::string search(const std::string& query) override {
        retrieval::SearchOutcome outcome = inner_.search_scored(query);
        fell_back_ = fell_back_ || outcome.reranker_fell_back;
        ++calls_;
        return retrieval::format_observation(outcome.chunks);
    }

    bool fell_back() const { return fell_back_; }
    std::uint32_t calls() const { return calls_; }

private:
    retrieval::Searcher& inner_;
    bool fell_back_ = false;
    std::uint32_t calls_ = 0;
};

/// Appends records in sample order regardless of completion order, so equal
/// runs produce byte-identical logs. Out-of-order results wait in a small
/// buffer (bounded by the worker count).
class OrderedCommitter {
public:
    OrderedCommitter(RecordLog& log, std::optional<std::size_t> abort_after,
                     std::atomic<bool>& abort_flag)
        : log_(log), abort_after_(abort_after), abort_flag_(abort_flag) {}

    void commit(std::size_t seq, QuestionRecord record) {
        std::lock_guard<std::mutex> lock(mutex_);
        pending_.emplace(seq, std::move(record));
        while (!pending_.empty() && pending_.begin()->first == next_seq_) {
            if (abort_flag_.load()) {
                return;
            }
            const QuestionRecord& head = pending_.begin()->second;
            log_.append(head);
            ++appended_;
            if (head.outcome == "failed") {
                ++failed_;
            }
            pending_.erase(pending_.begin());
            ++next_seq_;
            if (abort_after_.has_value() && appended_ >= *abort_after_) {
                abort_flag_.store(true);
                return;
            }
        }
    }

    std::size_t appended() const { return appended_; }
    std::size_t failed() const { return failed_; }

private:
    RecordLog& log_;
    std::optional<std::size_t> abort_after_;
    std::atomic<bool>& abort_flag_;
    std::mutex mutex_;
    std::map<std::size_t, QuestionRecord> pending_;
    std::size_t next_seq_ = 0;
    std::size_t appended_ = 0;
    std::size_t failed_ = 0;
};

std::uint64_t now_ms() {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::system_clock::now().time_since_epoch())
                                          .count());
}

} // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const std::string config_id = config.config_id();

    LoadedDataset dataset = load_dataset(config.dataset_path, config.dataset_format,
                                         config.collection);
    const std::size_t want = config.n_samples == 0 ? dataset.manifest.samples.size()
                                                   : config.n_samples;
    const std::vector<Sample> eval_set = select_eval_set(dataset.manifest, want, config.seed);
    const std::string eval_digest = dataset_hash(eval_set);

    auto embedder = make_embedder(config.embedder_spec);
    auto reranker = make_reranker(config.reranker_spec);
    retrieval::Index index = ensure_index(config, dataset, embedder.get());

    retrieval::SearchConfig search_config;
    search_config.mode = config.mode;
    retrieval::Searcher searcher(index, search_config, embedder.get(), reranker.get());

    PriceSheet prices;
    if (!config.price_sheet_path.empty()) {
        prices = PriceSheet::load(config.price_sheet_path);
    }

    std::optional<TraceFile> traces;
    std::unique_ptr<HttpBackend> http_backend;
    if (options.backend_factory) {
        // test hook; no backend resources needed
    } else if (config.backend.kind == BackendSpec::Kind::Scripted) {
        traces = TraceFile::load(config.backend.script_path);
    } else {
        HttpBackendConfig backend_config;
        backend_config.endpoint = config.backend.endpoint;
        backend_config.model = config.backend.model;
        http_backend = std::make_unique<HttpBackend>(backend_config);
    }
    std::shared_ptr<SessionLogSink> session_sink;
    if (!config.session_log.empty()) {
        session_sink = std::make_shared<SessionLogSink>(config.session_log);
    }

    std::optional<TraceFile> judge_traces;
    std::unique_ptr<HttpBackend> judge_backend;
    if (config.judge.kind == JudgeSpec::Kind::Scripted) {
        judge_traces = TraceFile::load(config.judge.script_path);
    } else if (config.judge.kind == JudgeSpec::Kind::Http) {
        HttpBackendConfig judge_config;
        judge_config.endpoint = config.judge.endpoint;
        judge_config.model = config.judge.model;
        judge_backend = std::make_unique<HttpBackend>(judge_config);
    }

    // Scripted runs use the zero clock so replays are byte-identical.
    const bool deterministic =
        config.backend.kind == BackendSpec::Kind::Scripted || options.backend_factory != nullptr;

    const std::filesystem::path run_dir = std::filesystem::path(config.output_dir) / config_id;
    std::filesystem::create_directories(run_dir);
    {
        std::ofstream out(run_dir / "config.txt");
        for (const auto& [key, value] : config.canonical_items()) {
            out << key << " = " << value << '\n';
        }
    }

    const std::filesystem::path records_path = run_dir / "records.jsonl";
    const auto completed = RecordLog::completed_keys(records_path);
    RecordLog log(records_path);

    std::vector<const Sample*> work;
    for (const Sample& sample : eval_set) {
        if (completed.count({sample.sample_id, config_id}) == 0) {
            work.push_back(&sample);
        }
    }

    EngineConfig engine_config;
    engine_config.budget = BudgetConfig{config.max_searches, config.max_total_tokens};
    engine_config.preplan_enabled = config.preplan;
    engine_config.reflection_enabled = config.reflection;
    engine_config.reflection_interval = config.reflection_interval;
    engine_config.max_turns = config.max_turns;

    std::atomic<bool> abort_flag{false};
    OrderedCommitter committer(log, options.abort_after_records, abort_flag);

    auto run_one = [&](const Sample& sample) -> QuestionRecord {
        const std::uint64_t started = deterministic ? 0 : now_ms();

        std::unique_ptr<ModelBackend> injected;
        std::unique_ptr<ScriptedBackend> scripted;
        std::unique_ptr<LoggingBackend> logging;
        ModelBackend* backend = nullptr;
        if (options.backend_factory) {
            injected = options.backend_factory(sample);
            backend = injected.get();
        } else if (config.backend.kind == BackendSpec::Kind::Scripted) {
            scripted = std::make_unique<ScriptedBackend>(traces->trace_for(sample.sample_id),
                                                         "scripted:" + sample.sample_id);
            backend = scripted.get();
        } else if (session_sink) {
            logging = std::make_unique<LoggingBackend>(*http_backend, session_sink,
                                                       sample.sample_id);
            backend = logging.get();
        } else {
            backend = http_backend.get();
        }

        TrackingSearch tracking(searcher);
        TrajectoryState state;
        std::vector<std::string> extra_flags;
        try {
            TrajectoryEngine engine(engine_config, *backend, tracking);
            state = engine.run(sample.question);
        } catch (const Error& e) {
            state.outcome = Failed{e.what()};
            extra_flags.push_back("engine_error");
        }

        GradeResult grade;
        const std::string answer = state.outcome.has_value() ? outcome_answer(*state.outcome) : "";
        if (!answer.empty()) {
            try {
                switch (config.judge.kind) {
                    case JudgeSpec::Kind::ExactMatch:
                        grade.verdict = exact_match(sample.reference_answer, answer);
                        break;
                    case JudgeSpec::Kind::Scripted: {
                        ScriptedBackend judge_scripted(judge_traces->trace_for(sample.sample_id),
                                                       "scripted-judge:" + sample.sample_id);
                        grade = judge(sample.question, sample.reference_answer, answer,
                                      judge_scripted);
                        break;
                    }
                    case JudgeSpec::Kind::Http:
                        grade = judge(sample.question, sample.reference_answer, answer,
                                      *judge_backend);
                        break;
                }
            } catch (const Error&) {
                grade.verdict.reset();
                extra_flags.push_back("judge_error");
            }
        }

        const std::uint64_t finished = deterministic ? 0 : now_ms();
        QuestionRecord record = make_record(sample.sample_id, config_id, state, grade, prices,
                                            eval_digest, started, finished);
        if (tracking.fell_back()) {
            record.flags.push_back("reranker_fallback");
        }
        if (state.backend_retries > 0) {
            record.flags.push_back("backend_retries:" + std::to_string(state.backend_retries));
        }
        record.flags.insert(record.flags.end(), extra_flags.begin(), extra_flags.end());
        return record;
    };

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        while (!abort_flag.load()) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= work.size()) {
                break;
            }
            committer.commit(i, run_one(*work[i]));
        }
    };

    const std::size_t thread_count =
        std::min<std::size_t>(config.concurrency, std::max<std::size_t>(work.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        threads.emplace_back(worker);
    }
    for (std::thread& thread : threads) {
        thread.join();
    }

    RunResult result;
    result.run_dir = run_dir;
    result.executed = committer.appended();
    result.skipped = eval_set.size() - work.size();
    result.failed = committer.failed();
    result.aborted = abort_flag.load();
    result.dataset_digest = dataset.manifest.content_hash;
    result.eval_set_digest = eval_digest;

    if (result.aborted) {
        return result;   // simulated kill: no summary for a dead run
    }

    const std::vector<QuestionRecord> records = RecordLog::read(records_path);
    try {
        result.summary = aggregate(records);
    } catch (const NoGradedSamples&) {
        result.summary.config_id = config_id;   // nothing graded; counters stay zero
        result.summary.n_ungraded = records.size();
    }

    json summary_json = {
        {"config_id", config_id},
        {"n_graded", result.summary.n_graded},
        {"n_correct", result.summary.n_correct},
        {"n_ungraded", result.summary.n_ungraded},
        {"accuracy_pct", result.summary.accuracy_pct},
        {"wilson_low_pct", result.summary.wilson_low_pct},
        {"wilson_high_pct", result.summary.wilson_high_pct},
        {"mean_searches", result.summary.mean_searches},
        {"mean_tokens_out", result.summary.mean_tokens_out},
        {"total_cost", result.summary.total_cost},
        {"dataset_digest", result.dataset_digest},
        {"eval_set_digest", result.eval_set_digest},
    };
    std::ofstream summary_out(run_dir / "summary.json");
    summary_out << summary_json.dump(2) << '\n';

    if (!options.quiet) {
        std::cout << "run " << config_id << ": " << result.executed << " executed, "
                  << result.skipped << " skipped, " << result.failed << " failed\n"
                  << "dataset digest " << result.dataset_digest << "\n"
                  << "eval set digest " << result.eval_set_digest << "\n"
                  << summary_table({&result.summary, 1});
    }
    return result;
}

} // namespace bcas
