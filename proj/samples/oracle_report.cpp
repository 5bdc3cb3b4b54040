// Run a few processes with known laws and print the predictor's final estimate next to the exact value.

#include <seqpred/experiment.hpp>

#include <cstdio>

using namespace seqpred;

int main()
{
    const std::pair<const char *, const char *> processes[] = {
            {"fair coin", "iid:0.5,0.5"},
            {"order-1 chain", "markov:1:0.9,0.1/0.2,0.8"},
            {"order-2 chain", "markov:2:0.8,0.2/0.5,0.5/0.5,0.5/0.2,0.8"},
            {"hidden Markov", "hidden_markov:0.8,0.2/0.3,0.7|0.95,0.05/0.05,0.95"},
    };

    std::printf("%-14s %8s %6s %6s %9s %9s %9s\n", "process", "events", "kappa", "memory", "P^(1)", "P(1)",
                "mean err");
    for ( const auto &[name, spec] : processes )
    {
        ExperimentConfig c;
        c.process = parse_process(spec);
        c.horizon = 50000;
        c.seed = 7;
        const auto r = run_replication(c, 0);
        const auto &s = r.summary;
        const auto &last = r.rows.back();
        std::printf("%-14s %8zu %6zu %6s %9.4f %9.4f %9.4f\n", name, s.events, s.kappa_final,
                    s.memory ? std::to_string(*s.memory).c_str() : "inf", last.estimate[1], (*last.oracle)[1],
                    s.err_mean_last_decile.value_or(0.0));
    }
}
