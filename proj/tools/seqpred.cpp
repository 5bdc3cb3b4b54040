// seqpred: simulate processes, run the online predictor and compare it with exact oracles.
//
//   seqpred simulate       --process SPEC --horizon N --seed S --out path.txt
//   seqpred estimate       (--process SPEC | --input path.txt) [--beta --gamma --schedule] --out trace.csv
//   seqpred compare-oracle --process SPEC --replications R --horizon N --out summary.csv
//   seqpred sweep          --process SPEC --beta 0.1,0.2 --gamma 0.2,0.3 --schedule "identity;log" --out sweep.csv
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <seqpred/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace seqpred;

namespace {

using Options = std::map<std::string, std::string>;

const char *const kKeys[] = {"process", "order", "kernel-file", "beta", "gamma", "schedule", "horizon",
                             "replications", "seed", "out", "input", "columns", "threads"};

std::optional<std::string> get(const Options &o, const std::string &key)
{
    const auto it = o.find(key);
    if ( it == o.end() || it->second.empty())
        return std::nullopt;
    return it->second;
}

std::optional<ProcessSpec> process_from(const Options &o)
{
    const auto spec = get(o, "process");
    if ( !spec )
        return std::nullopt;
    std::string full = *spec;
    if ( const auto file = get(o, "kernel-file"))
    {
        if ( spec->find(':') != std::string::npos )
            throw ValidationError("give either a full --process spec or a kind plus --kernel-file, not both");
        const std::size_t order = get(o, "order") ? text::to_uint(*get(o, "order"), "order") : 1;
        full = read_kernel_file(*file, *spec, order);
    }
    else if ( const auto order = get(o, "order"); order && spec->rfind("markov:", 0) == 0 )
    {
        const auto parsed = parse_process(full);
        if ( std::get<MarkovSpec>(parsed.kind).order != text::to_uint(*order, "order"))
            throw ValidationError("--order disagrees with the order inside --process");
    }
    return parse_process(full);
}

ExperimentConfig config_from(const Options &o)
{
    ExperimentConfig c;
    c.process = process_from(o);
    if ( const auto v = get(o, "beta"))
        c.params.beta = text::to_double(*v, "beta");
    if ( const auto v = get(o, "gamma"))
        c.params.gamma = text::to_double(*v, "gamma");
    if ( const auto v = get(o, "schedule"))
        c.params.schedule = parse_schedule(*v);
    if ( const auto v = get(o, "horizon"))
        c.horizon = text::to_uint(*v, "horizon");
    if ( const auto v = get(o, "replications"))
        c.replications = text::to_uint(*v, "replications");
    if ( const auto v = get(o, "seed"))
        c.seed = text::to_uint(*v, "seed");
    if ( const auto v = get(o, "threads"))
        c.threads = text::to_uint(*v, "threads");
    if ( const auto v = get(o, "columns"))
        c.columns = text::split(*v, ',');
    return c;
}

void emit(const Options &o, const std::string &content)
{
    if ( const auto out = get(o, "out"))
        write_file(*out, content);
    else
        std::cout << content;
}

ExperimentConfig require_process(const Options &o)
{
    auto c = config_from(o);
    if ( !c.process )
        throw ValidationError("--process is required");
    validate_config(c);
    return c;
}

void cmd_simulate(const Options &o)
{
    const auto c = require_process(o);
    const auto out = get(o, "out");
    for ( std::size_t r = 0; r < c.replications; ++r )
    {
        ProcessSpec spec = *c.process;
        spec.seed = replication_seed(c.seed, r);
        const auto path = generate(spec, c.horizon);
        const std::string body = format_path_file(path, {{"seqpred path", ""},
                                                         {"process", format_process(spec)},
                                                         {"seed", std::to_string(c.seed)},
                                                         {"seed_rule", std::string(kSeedRule)},
                                                         {"replication", std::to_string(r)},
                                                         {"horizon", std::to_string(c.horizon)}});
        if ( out )
            write_file(c.replications == 1 ? *out : *out + "." + std::to_string(r), body);
        else
            std::cout << body << "\n";
    }
}

void cmd_estimate(Options o)
{
    std::optional<PathFile> input;
    if ( const auto file = get(o, "input"))
    {
        input = read_path_file(*file);
        // A path written by `simulate` carries its spec and seed; flags still take precedence.
        for ( const char *key : {"process", "seed"} )
            if ( !get(o, key) && input->header.count(key))
                o[key] = input->header.at(key);
        if ( !get(o, "horizon"))
            o["horizon"] = std::to_string(input->path.size());
        if ( input->header.count("replication") && input->header.at("replication") != "0" )
            throw ValidationError("estimate --input replays replication 0 only");
    }
    auto c = config_from(o);
    if ( !c.process && !input )
        throw ValidationError("--process or --input is required");
    if ( input )
        c.replications = 1;
    validate_config(c);
    const Path *path = input ? &input->path : nullptr;
    const auto results = run_replications(c, path);
    std::vector<std::pair<std::string, std::string>> extra;
    if ( const auto file = get(o, "input"))
        extra.emplace_back("input", *file);
    emit(o, format_trace(c, results, extra, path));
}

void cmd_compare(const Options &o)
{
    const auto c = require_process(o);
    emit(o, format_summary(c, run_replications(c)));
}

void cmd_sweep(const Options &o)
{
    Options base = o;
    SweepGrid grid;
    for ( const auto &b : text::split(get(o, "beta").value_or("0.3"), ','))
        grid.betas.push_back(text::to_double(b, "beta"));
    for ( const auto &g : text::split(get(o, "gamma").value_or("0.3"), ','))
        grid.gammas.push_back(text::to_double(g, "gamma"));
    for ( const auto &s : text::split(get(o, "schedule").value_or("identity"), ';'))
        grid.schedules.push_back(parse_schedule(s));
    base.erase("beta");
    base.erase("gamma");
    base.erase("schedule");
    const auto c = require_process(base);
    emit(o, run_sweep(c, grid));
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Online prediction along data-driven stopping times, with simulators and exact oracles"};
    app.require_subcommand(1);

    std::map<std::string, std::string> flags;
    std::string config_file;
    const auto add_common = [&]( CLI::App *sub ) {
        sub->add_option("--config", config_file, "key=value file; flags override it");
        sub->add_option("--process", flags["process"],
                        "iid:p,.. | markov:order:row;row | hidden_markov:T|E | countable_iid:p, or a kind with --kernel-file");
        sub->add_option("--order", flags["order"], "markov order when reading --kernel-file");
        sub->add_option("--kernel-file", flags["kernel-file"], "rows of the kernel, one per line");
        sub->add_option("--beta", flags["beta"], "deviation threshold exponent (default 0.3)");
        sub->add_option("--gamma", flags["gamma"], "frequency threshold exponent (default 0.3)");
        sub->add_option("--schedule", flags["schedule"], "identity | log | log:delta=..,eps1=..,eps2=.. | table:..");
        sub->add_option("--horizon", flags["horizon"], "number of symbols (default 1000)");
        sub->add_option("--replications", flags["replications"], "independent replications (default 1)");
        sub->add_option("--seed", flags["seed"], "master seed (default 0)");
        sub->add_option("--out", flags["out"], "output file (default stdout)");
        sub->add_option("--threads", flags["threads"], "worker threads (default: all cores)");
    };
    auto *simulate = app.add_subcommand("simulate", "write a seeded sample path");
    auto *estimate = app.add_subcommand("estimate", "run the predictor and write its trace");
    auto *compare = app.add_subcommand("compare-oracle", "per-replication summary against the exact oracle");
    auto *sweep = app.add_subcommand("sweep", "grid over beta, gamma and schedule");
    for ( auto *sub : {simulate, estimate, compare, sweep} )
        add_common(sub);
    estimate->add_option("--input", flags["input"], "path file written by simulate (or any symbol list)");
    estimate->add_option("--columns", flags["columns"], "comma-separated subset of trace columns");

    try
    {
        app.parse(argc, argv);
    } catch ( const CLI::ParseError &e )
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        Options o;
        if ( !config_file.empty())
            o = read_config_file(config_file);
        for ( const auto &[k, v] : o )
            if ( std::find(std::begin(kKeys), std::end(kKeys), k) == std::end(kKeys))
                throw ValidationError("unknown config key '" + k + "'");
        for ( const auto &[k, v] : flags )
            if ( !v.empty())
                o[k] = v;

        if ( simulate->parsed())
            cmd_simulate(o);
        else if ( estimate->parsed())
            cmd_estimate(o);
        else if ( compare->parsed())
            cmd_compare(o);
        else
            cmd_sweep(o);
    } catch ( const IoError &e )
    {
        std::cerr << "seqpred: " << e.what() << "\n";
        return 2;
    } catch ( const std::exception &e )
    {
        std::cerr << "seqpred: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
