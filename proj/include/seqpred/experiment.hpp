#pragma once

// Experiment plumbing behind the command-line tool: text formats for process specs and schedules,
// config files, path and trace files, seeded parallel replications and oracle summaries.

#include "core.hpp"
#include "predictor.hpp"
#include "processes.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace seqpred {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace text {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if ( b == std::string_view::npos )
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while ( true )
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if ( pos == std::string_view::npos )
            return out;
        start = pos + 1;
    }
}

inline double to_double(std::string_view s, std::string_view what)
{
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if ( ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError("cannot read " + std::string(what) + " from '" + t + "'");
    return v;
}

inline std::uint64_t to_uint(std::string_view s, std::string_view what)
{
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if ( ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError("cannot read " + std::string(what) + " from '" + t + "'");
    return v;
}

/// Shortest text that reads back to the same double.
inline std::string num(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline Row parse_row(std::string_view s)
{
    Row row;
    for ( const auto &cell : split(s, ','))
        row.push_back(to_double(cell, "probability"));
    return row;
}

/// Rows separated by ';' or, to spare shell quoting, '/'.
inline Matrix parse_rows(std::string_view s)
{
    std::string t(s);
    std::replace(t.begin(), t.end(), '/', ';');
    Matrix m;
    for ( const auto &r : split(t, ';'))
        m.push_back(parse_row(r));
    return m;
}

inline std::string format_rows(const Matrix &m)
{
    std::string out;
    for ( std::size_t i = 0; i < m.size(); ++i )
    {
        if ( i )
            out += ';';
        for ( std::size_t j = 0; j < m[i].size(); ++j )
            out += (j ? "," : "") + num(m[i][j]);
    }
    return out;
}

}  // namespace text

/// Process spec text:
///   iid:p0,p1,...                      countable_iid:p
///   markov:order:row;row;...           hidden_markov:row;row|row;row   (transition | emission)
/// Entries are comma-separated and rows ';'- or '/'-separated; markov rows are ordered by context with the oldest symbol most significant.
inline ProcessSpec parse_process(std::string_view spec, std::uint64_t seed = 0)
{
    const auto colon = spec.find(':');
    const std::string kind = text::trim(spec.substr(0, colon));
    const std::string body = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
    ProcessSpec out;
    out.seed = seed;
    if ( kind == "iid" )
        out.kind = IidSpec{text::parse_row(body)};
    else if ( kind == "countable_iid" )
        out.kind = CountableIidSpec{text::to_double(body, "geometric parameter")};
    else if ( kind == "markov" )
    {
        const auto c = body.find(':');
        if ( c == std::string::npos )
            throw ValidationError("markov spec needs markov:order:rows");
        MarkovSpec m;
        m.order = text::to_uint(body.substr(0, c), "markov order");
        m.kernel = text::parse_rows(body.substr(c + 1));
        m.alphabet = m.kernel.empty() ? 0 : m.kernel.front().size();
        out.kind = std::move(m);
    }
    else if ( kind == "hidden_markov" )
    {
        const auto bar = body.find('|');
        if ( bar == std::string::npos )
            throw ValidationError("hidden_markov spec needs transition|emission");
        out.kind = HiddenMarkovSpec{text::parse_rows(body.substr(0, bar)), text::parse_rows(body.substr(bar + 1))};
    }
    else
        throw ValidationError("unknown process kind '" + kind + "'");
    validate(out);
    return out;
}

inline std::string format_process(const ProcessSpec &spec)
{
    return std::visit([]( const auto &k ) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr ( std::is_same_v<K, IidSpec> )
            return "iid:" + text::format_rows({k.probabilities});
        else if constexpr ( std::is_same_v<K, CountableIidSpec> )
            return "countable_iid:" + text::num(k.p);
        else if constexpr ( std::is_same_v<K, MarkovSpec> )
            return "markov:" + std::to_string(k.order) + ":" + text::format_rows(k.kernel);
        else
            return "hidden_markov:" + text::format_rows(k.transition) + "|" + text::format_rows(k.emission);
    }, spec.kind);
}

/// Kernel file: one row per line, entries separated by commas or whitespace, '#' starts a comment.
/// For hidden_markov a blank line separates the transition rows from the emission rows.
inline std::string read_kernel_file(const std::string &file, const std::string &kind, std::size_t order)
{
    std::ifstream in(file);
    if ( !in )
        throw IoError("cannot open kernel file " + file);
    std::vector<std::vector<std::string>> blocks(1);
    std::string line;
    while ( std::getline(in, line))
    {
        if ( const auto h = line.find('#'); h != std::string::npos )
            line.erase(h);
        std::replace(line.begin(), line.end(), '\t', ' ');
        std::string row;
        std::istringstream cells(line);
        for ( std::string cell; cells >> cell; )
            for ( const auto &piece : text::split(cell, ','))
                if ( !piece.empty())
                    row += (row.empty() ? "" : ",") + piece;
        if ( row.empty())
        {
            if ( !blocks.back().empty())
                blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(row);
    }
    if ( blocks.back().empty())
        blocks.pop_back();
    const auto join = []( const std::vector<std::string> &rows ) {
        std::string s;
        for ( std::size_t i = 0; i < rows.size(); ++i )
            s += (i ? ";" : "") + rows[i];
        return s;
    };
    if ( blocks.empty())
        throw ValidationError("kernel file " + file + " holds no rows");
    if ( kind == "markov" )
    {
        if ( blocks.size() != 1 )
            throw ValidationError("markov kernel file must be a single block of rows");
        return "markov:" + std::to_string(order) + ":" + join(blocks[0]);
    }
    if ( kind == "hidden_markov" )
    {
        if ( blocks.size() != 2 )
            throw ValidationError("hidden_markov kernel file needs transition rows, a blank line, emission rows");
        return "hidden_markov:" + join(blocks[0]) + "|" + join(blocks[1]);
    }
    if ( kind == "iid" )
        return "iid:" + join(blocks[0]);
    throw ValidationError("--kernel-file does not apply to process kind '" + kind + "'");
}

/// identity | log | log:delta=..,eps1=..,eps2=.. | table:1,1,2,...
inline Schedule parse_schedule(std::string_view s)
{
    const std::string t = text::trim(s);
    if ( t == "identity" )
        return Schedule::identity();
    if ( t == "log" )
        return Schedule::logarithmic();
    if ( t.rfind("log:", 0) == 0 )
    {
        double delta = 1.0, eps1 = 0.5, eps2 = 0.25;
        for ( const auto &kv : text::split(std::string_view(t).substr(4), ','))
        {
            const auto eq = kv.find('=');
            if ( eq == std::string::npos )
                throw ValidationError("schedule parameter '" + kv + "' needs key=value");
            const std::string key = text::trim(kv.substr(0, eq));
            const double v = text::to_double(kv.substr(eq + 1), key);
            if ( key == "delta" )
                delta = v;
            else if ( key == "eps1" )
                eps1 = v;
            else if ( key == "eps2" )
                eps2 = v;
            else
                throw ValidationError("unknown schedule parameter '" + key + "'");
        }
        return Schedule::logarithmic(delta, eps1, eps2);
    }
    if ( t.rfind("table:", 0) == 0 )
    {
        std::vector<std::size_t> values;
        for ( const auto &v : text::split(std::string_view(t).substr(6), ','))
            values.push_back(text::to_uint(v, "schedule table entry"));
        return Schedule::table(std::move(values));
    }
    throw ValidationError("unknown schedule '" + t + "'");
}

/// Replication r draws its process seed from splitmix64(master + golden * (r + 1)).
inline std::uint64_t replication_seed(std::uint64_t master, std::uint64_t r)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (r + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::string_view kSeedRule = "splitmix64(seed + 0x9e3779b97f4a7c15 * (r + 1))";

struct ExperimentConfig {
    std::optional<ProcessSpec> process;  // empty when the path comes from a file
    EstimatorParams params;
    std::size_t horizon = 1000;  // number of observed symbols X_0, ..., X_{horizon-1}
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;  // empty means every column
    std::size_t threads = 0;           // 0 = hardware concurrency
};

inline void validate_config(const ExperimentConfig &c)
{
    validate_params(c.params);
    if ( c.horizon < 1 )
        throw ValidationError("horizon must be at least 1");
    if ( c.replications < 1 )
        throw ValidationError("replications must be at least 1");
    if ( c.process )
        validate(*c.process);
}

/// key=value lines, '#' comments. Returns the raw map; the caller merges it under its flags.
inline std::map<std::string, std::string> read_config_file(const std::string &file)
{
    std::ifstream in(file);
    if ( !in )
        throw IoError("cannot open config file " + file);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t no = 0;
    while ( std::getline(in, line))
    {
        ++no;
        if ( const auto h = line.find('#'); h != std::string::npos )
            line.erase(h);
        if ( text::trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if ( eq == std::string::npos )
            throw ValidationError(file + ":" + std::to_string(no) + ": expected key=value");
        out[text::trim(line.substr(0, eq))] = text::trim(line.substr(eq + 1));
    }
    return out;
}

// ---- path files -----------------------------------------------------------------------------------

struct PathFile {
    Path path;
    std::map<std::string, std::string> header;  // key=value pairs from '#' lines
};

/// '# key=value' header lines followed by one decimal symbol per line, no trailing newline.
inline std::string format_path_file(const Path &path, const std::vector<std::pair<std::string, std::string>> &header)
{
    std::string out;
    for ( const auto &[k, v] : header )
        out += "# " + k + (v.empty() ? "" : "=" + v) + "\n";
    for ( std::size_t t = 0; t < path.size(); ++t )
        out += (t ? "\n" : "") + std::to_string(path[t]);
    return out;
}

inline PathFile parse_path_file(std::istream &in, const std::string &name = "path")
{
    PathFile out;
    std::vector<Symbol> xs;
    std::string line;
    std::size_t no = 0;
    while ( std::getline(in, line))
    {
        ++no;
        const std::string t = text::trim(line);
        if ( t.empty())
            continue;
        if ( t.front() == '#' )
        {
            const std::string kv = text::trim(std::string_view(t).substr(1));
            if ( const auto eq = kv.find('='); eq != std::string::npos )
                out.header[text::trim(kv.substr(0, eq))] = text::trim(kv.substr(eq + 1));
            continue;
        }
        const auto v = text::to_uint(t, name + ":" + std::to_string(no) + " symbol");
        if ( v > std::numeric_limits<Symbol>::max())
            throw ValidationError(name + ":" + std::to_string(no) + ": symbol out of range");
        xs.push_back(static_cast<Symbol>(v));
    }
    out.path = Path(std::move(xs));
    return out;
}

inline PathFile read_path_file(const std::string &file)
{
    std::ifstream in(file);
    if ( !in )
        throw IoError("cannot open path file " + file);
    return parse_path_file(in, file);
}

inline void write_file(const std::string &file, const std::string &content)
{
    std::ofstream out(file, std::ios::binary);
    if ( !out )
        throw IoError("cannot write " + file);
    out << content;
    if ( !out.flush())
        throw IoError("write failed for " + file);
}

// ---- traces -----------------------------------------------------------------------------------------

struct TraceRow {
    std::size_t replication = 0;
    std::size_t r = 0;
    Position lambda = 0;
    std::size_t kappa = 0;
    std::vector<double> estimate;             // f_r(z) per tracked symbol
    std::optional<std::vector<double>> oracle;  // P(X_{lambda_r+1} = z | X_0^{lambda_r})
    std::optional<double> abs_error;          // max over tracked symbols of |estimate - oracle|
    double lambda_over_r = 0.0;
};

/// End-of-run diagnostics for one replication, checked against the oracle where one exists.
struct ReplicationSummary {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::size_t events = 0;
    Position last_lambda = 0;
    std::size_t kappa_final = 0;
    std::size_t kappa_min_last_decile = 0;
    std::size_t kappa_max_last_decile = 0;
    std::optional<std::size_t> memory;    // true memory length at the realised X~ context
    std::optional<double> ratio_target;   // 1 / P(X~_{-K+1}^0)
    double ratio = 0.0;                   // lambda_R / R
    std::optional<double> err_max_last_decile;
    std::optional<double> err_mean_last_decile;
    std::optional<std::size_t> unit_steps_from;  // smallest r0 with lambda_r - lambda_{r-1} = 1 for all r > r0
    Position unit_steps_from_time = 0;           // lambda_{r0}
    std::size_t undetermined_selections = 0;
    std::vector<Symbol> tilde;  // X~_0, X~_{-1}, ... as far as determined (up to 16)
};

struct ReplicationResult {
    std::vector<TraceRow> rows;
    ReplicationSummary summary;
};

/// Symbols whose estimates are reported: the finite alphabet, or 0..3 for the countable alphabet
/// (and for path files without a spec, every symbol seen).
inline std::vector<Symbol> tracked_symbols(const std::optional<ProcessSpec> &spec, const Path *input)
{
    std::size_t a = 4;
    if ( spec )
    {
        if ( const auto n = Oracle(*spec).alphabet_size())
            a = *n;
    }
    else if ( input )
    {
        a = 1;
        for ( Symbol x : input->symbols())
            a = std::max<std::size_t>(a, static_cast<std::size_t>(x) + 1);
    }
    std::vector<Symbol> out(a);
    for ( std::size_t z = 0; z < a; ++z )
        out[z] = static_cast<Symbol>(z);
    return out;
}

/// One replication: either simulate from the spec with the replication seed, or replay `input`.
inline ReplicationResult run_replication(const ExperimentConfig &config, std::size_t replication,
                                         const Path *input = nullptr)
{
    ReplicationResult out;
    auto &s = out.summary;
    s.replication = replication;
    s.seed = replication_seed(config.seed, replication);

    std::optional<Oracle> oracle;
    if ( config.process )
    {
        ProcessSpec spec = *config.process;
        spec.seed = s.seed;
        oracle.emplace(std::move(spec));
    }
    std::optional<Sampler> sampler;
    if ( !input )
    {
        if ( !oracle )
            throw ValidationError("a process spec or an input path is required");
        sampler.emplace(*oracle);
    }
    std::optional<ConditionalFilter> filter;
    if ( oracle )
        filter.emplace(*oracle);

    const auto symbols = tracked_symbols(config.process, input);
    const std::size_t length = input ? std::min(config.horizon, input->size()) : config.horizon;

    Predictor predictor(config.params);
    std::vector<Event> events;
    for ( std::size_t t = 0; t < length; ++t )
    {
        const Symbol x = input ? (*input)[t] : sampler->next();
        events.clear();
        predictor.step(x, events);
        if ( filter )
            filter->observe(x);
        for ( const auto &e : events )
        {
            const auto *l = std::get_if<LambdaEvent>(&e);
            if ( !l )
                continue;
            TraceRow row;
            row.replication = replication;
            row.r = l->index;
            row.lambda = l->position;
            row.kappa = l->kappa;
            for ( Symbol z : symbols )
                row.estimate.push_back(l->estimate.probability(z));
            if ( filter )
            {
                row.oracle.emplace();
                double err = 0.0;
                for ( std::size_t i = 0; i < symbols.size(); ++i )
                {
                    row.oracle->push_back(filter->predict(symbols[i]));
                    err = std::max(err, std::abs(row.estimate[i] - row.oracle->back()));
                }
                row.abs_error = err;
            }
            row.lambda_over_r = static_cast<double>(row.lambda) / static_cast<double>(row.r);
            out.rows.push_back(std::move(row));
        }
    }

    s.events = out.rows.size();
    s.undetermined_selections = predictor.undetermined_context_selections();
    for ( std::size_t i = 0; i < 16; ++i )
    {
        const auto v = predictor.tilde(i);
        if ( !v )
            break;
        s.tilde.push_back(*v);
    }
    if ( out.rows.empty())
        return out;

    const auto &rows = out.rows;
    s.last_lambda = rows.back().lambda;
    s.kappa_final = rows.back().kappa;
    s.ratio = rows.back().lambda_over_r;
    const std::size_t from = rows.size() * 9 / 10;
    s.kappa_min_last_decile = s.kappa_max_last_decile = rows[from].kappa;
    double err_sum = 0.0, err_max = 0.0;
    for ( std::size_t i = from; i < rows.size(); ++i )
    {
        s.kappa_min_last_decile = std::min(s.kappa_min_last_decile, rows[i].kappa);
        s.kappa_max_last_decile = std::max(s.kappa_max_last_decile, rows[i].kappa);
        if ( rows[i].abs_error )
        {
            err_sum += *rows[i].abs_error;
            err_max = std::max(err_max, *rows[i].abs_error);
        }
    }
    if ( filter )
    {
        s.err_max_last_decile = err_max;
        s.err_mean_last_decile = err_sum / static_cast<double>(rows.size() - from);
    }
    std::size_t r0 = rows.size();  // rows[i].r == i + 1
    while ( r0 > 1 && rows[r0 - 1].lambda == rows[r0 - 2].lambda + 1 )
        --r0;
    if ( r0 == 1 && rows[0].lambda == 1 )
        r0 = 0;
    if ( r0 < rows.size())
    {
        s.unit_steps_from = r0;
        s.unit_steps_from_time = r0 == 0 ? 0 : rows[r0 - 1].lambda;
    }

    if ( oracle && !std::holds_alternative<HiddenMarkovSpec>(oracle->spec().kind))
    {
        // The memory at X~ only depends on its last `order` symbols.
        std::size_t need = 0;
        if ( const auto *m = std::get_if<MarkovSpec>(&oracle->spec().kind))
            need = m->order;
        if ( s.tilde.size() >= need )
        {
            Pattern context(s.tilde.begin(), s.tilde.begin() + static_cast<long>(need));
            std::reverse(context.begin(), context.end());
            s.memory = oracle->true_memory_length(context);
            Pattern block(context.end() - static_cast<long>(*s.memory), context.end());
            s.ratio_target = 1.0 / oracle->marginal_block_probability(block);
        }
    }
    return out;
}

/// Runs every replication on its own thread pool slot; results come back in replication order.
inline std::vector<ReplicationResult> run_replications(const ExperimentConfig &config, const Path *input = nullptr)
{
    validate_config(config);
    std::vector<ReplicationResult> results(config.replications);
    std::vector<std::exception_ptr> errors(config.replications);
    std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, config.replications);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for ( std::size_t r; (r = next++) < config.replications; )
        {
            try
            {
                results[r] = run_replication(config, r, input);
            } catch ( ... )
            {
                errors[r] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for ( std::size_t i = 1; i < workers; ++i )
        pool.emplace_back(work);
    work();
    for ( auto &t : pool )
        t.join();
    for ( auto &e : errors )
        if ( e )
            std::rethrow_exception(e);
    return results;
}

inline std::vector<std::string> trace_columns(const std::vector<Symbol> &symbols)
{
    std::vector<std::string> cols{"replication", "r", "lambda", "kappa"};
    for ( Symbol z : symbols )
        cols.push_back("f_" + std::to_string(z));
    for ( Symbol z : symbols )
        cols.push_back("oracle_" + std::to_string(z));
    cols.push_back("abs_error");
    cols.push_back("lambda_over_r");
    return cols;
}

inline std::vector<std::pair<std::string, std::string>> config_header(const ExperimentConfig &c)
{
    std::vector<std::pair<std::string, std::string>> h;
    if ( c.process )
        h.emplace_back("process", format_process(*c.process));
    h.emplace_back("seed", std::to_string(c.seed));
    h.emplace_back("seed_rule", std::string(kSeedRule));
    h.emplace_back("beta", text::num(c.params.beta));
    h.emplace_back("gamma", text::num(c.params.gamma));
    h.emplace_back("schedule", c.params.schedule.describe());
    h.emplace_back("horizon", std::to_string(c.horizon));
    h.emplace_back("replications", std::to_string(c.replications));
    return h;
}

/// CSV trace with a '#' header naming every parameter needed to regenerate it.
inline std::string format_trace(const ExperimentConfig &config, const std::vector<ReplicationResult> &results,
                                const std::vector<std::pair<std::string, std::string>> &extra_header = {},
                                const Path *input = nullptr)
{
    const auto symbols = tracked_symbols(config.process, input);
    const auto all = trace_columns(symbols);
    std::vector<std::string> cols = config.columns.empty() ? all : config.columns;
    for ( const auto &c : cols )
        if ( std::find(all.begin(), all.end(), c) == all.end())
            throw ValidationError("unknown trace column '" + c + "'");

    std::string out = "# seqpred trace\n";
    for ( const auto &[k, v] : config_header(config))
        out += "# " + k + "=" + v + "\n";
    for ( const auto &[k, v] : extra_header )
        out += "# " + k + "=" + v + "\n";
    for ( std::size_t i = 0; i < cols.size(); ++i )
        out += (i ? "," : "") + cols[i];
    out += "\n";

    const auto cell = [&]( const TraceRow &row, const std::string &c ) -> std::string {
        if ( c == "replication" )
            return std::to_string(row.replication);
        if ( c == "r" )
            return std::to_string(row.r);
        if ( c == "lambda" )
            return std::to_string(row.lambda);
        if ( c == "kappa" )
            return std::to_string(row.kappa);
        if ( c == "abs_error" )
            return row.abs_error ? text::num(*row.abs_error) : "";
        if ( c == "lambda_over_r" )
            return text::num(row.lambda_over_r);
        const bool est = c.rfind("f_", 0) == 0;
        const std::size_t z = std::stoul(c.substr(est ? 2 : 7));
        if ( est )
            return text::num(row.estimate[z]);
        return row.oracle ? text::num((*row.oracle)[z]) : "";
    };
    for ( const auto &res : results )
        for ( const auto &row : res.rows )
        {
            for ( std::size_t i = 0; i < cols.size(); ++i )
                out += (i ? "," : "") + cell(row, cols[i]);
            out += "\n";
        }
    return out;
}

inline double median(std::vector<double> v)
{
    if ( v.empty())
        return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template < typename T >
std::string opt(const std::optional<T> &v)
{
    if ( !v )
        return "";
    if constexpr ( std::is_floating_point_v<T> )
        return text::num(*v);
    else
        return std::to_string(*v);
}

inline std::string format_summary(const ExperimentConfig &config, const std::vector<ReplicationResult> &results)
{
    std::string out = "# seqpred compare-oracle\n";
    for ( const auto &[k, v] : config_header(config))
        out += "# " + k + "=" + v + "\n";
    out += "replication,seed,events,last_lambda,kappa_final,kappa_min_last_decile,kappa_max_last_decile,memory,"
           "kappa_recovered,ratio,ratio_target,ratio_rel_error,err_max_last_decile,err_mean_last_decile,"
           "unit_steps_from,unit_steps_from_time,undetermined_selections\n";
    for ( const auto &res : results )
    {
        const auto &s = res.summary;
        std::optional<double> rel;
        if ( s.ratio_target )
            rel = std::abs(s.ratio - *s.ratio_target) / *s.ratio_target;
        std::string recovered;
        if ( s.memory )
            recovered = s.kappa_min_last_decile == *s.memory && s.kappa_max_last_decile == *s.memory ? "1" : "0";
        out += std::to_string(s.replication) + "," + std::to_string(s.seed) + "," + std::to_string(s.events) + "," +
               std::to_string(s.last_lambda) + "," + std::to_string(s.kappa_final) + "," +
               std::to_string(s.kappa_min_last_decile) + "," + std::to_string(s.kappa_max_last_decile) + "," +
               opt(s.memory) + "," + recovered + "," + text::num(s.ratio) + "," + opt(s.ratio_target) + "," +
               opt(rel) + "," + opt(s.err_max_last_decile) + "," + opt(s.err_mean_last_decile) + "," +
               opt(s.unit_steps_from) + "," + (s.unit_steps_from ? std::to_string(s.unit_steps_from_time) : "") +
               "," + std::to_string(s.undetermined_selections) + "\n";
    }
    return out;
}

// ---- sweeps -----------------------------------------------------------------------------------------

struct SweepGrid {
    std::vector<double> betas;
    std::vector<double> gammas;
    std::vector<Schedule> schedules;
};

struct SweepPoint {
    double beta;
    double gamma;
    Schedule schedule;
};

/// Cartesian product in (beta, gamma, schedule) order; every point is validated before anything runs.
inline std::vector<SweepPoint> expand_grid(const SweepGrid &grid)
{
    std::vector<SweepPoint> points;
    for ( double b : grid.betas )
        for ( double g : grid.gammas )
            for ( const auto &s : grid.schedules )
            {
                EstimatorParams p;
                p.beta = b;
                p.gamma = g;
                p.schedule = s;
                try
                {
                    validate_params(p);
                } catch ( const ValidationError &e )
                {
                    throw ValidationError("grid point beta=" + text::num(b) + " gamma=" + text::num(g) +
                                          " schedule=" + s.describe() + ": " + e.what());
                }
                points.push_back({b, g, s});
            }
    if ( points.empty())
        throw ValidationError("sweep grid is empty");
    return points;
}

inline std::string run_sweep(const ExperimentConfig &base, const SweepGrid &grid)
{
    const auto points = expand_grid(grid);
    validate_config(base);
    std::string out = "# seqpred sweep\n";
    for ( const auto &[k, v] : config_header(base))
        if ( k != "beta" && k != "gamma" && k != "schedule" )
            out += "# " + k + "=" + v + "\n";
    out += "point,beta,gamma,schedule,replication,seed,events,kappa_final,ratio,err_mean_last_decile\n";
    std::string medians;
    for ( std::size_t i = 0; i < points.size(); ++i )
    {
        ExperimentConfig c = base;
        c.params.beta = points[i].beta;
        c.params.gamma = points[i].gamma;
        c.params.schedule = points[i].schedule;
        const auto results = run_replications(c);
        std::vector<double> kappas, ratios, errs;
        for ( const auto &res : results )
        {
            const auto &s = res.summary;
            out += std::to_string(i) + "," + text::num(c.params.beta) + "," + text::num(c.params.gamma) + ",\"" +
                   c.params.schedule.describe() + "\"," + std::to_string(s.replication) + "," +
                   std::to_string(s.seed) + "," + std::to_string(s.events) + "," + std::to_string(s.kappa_final) +
                   "," + text::num(s.ratio) + "," + opt(s.err_mean_last_decile) + "\n";
            kappas.push_back(static_cast<double>(s.kappa_final));
            ratios.push_back(s.ratio);
            if ( s.err_mean_last_decile )
                errs.push_back(*s.err_mean_last_decile);
        }
        medians += "# median point=" + std::to_string(i) + " kappa_final=" + text::num(median(kappas)) +
                   " ratio=" + text::num(median(ratios)) +
                   (errs.empty() ? std::string() : " err_mean_last_decile=" + text::num(median(errs))) + "\n";
    }
    return out + medians;
}

}  // namespace seqpred
