// Feed symbols one at a time and print every recurrence time and prediction time as it happens.
//
//   sample_online_prediction            (simulates 2000 symbols of a sticky binary chain)
//   echo 0 1 1 0 1 1 0 ... | sample_online_prediction -
//
// Symbols on stdin are whitespace-separated nonnegative integers.

#include <seqpred/predictor.hpp>
#include <seqpred/processes.hpp>

#include <cstdio>
#include <iostream>
#include <string>

using namespace seqpred;

int main(int argc, char **argv)
{
    std::vector<Symbol> xs;
    if ( argc > 1 && std::string(argv[1]) == "-" )
    {
        long v;
        while ( std::cin >> v )
        {
            if ( v < 0 )
            {
                std::cerr << "symbols must be nonnegative\n";
                return 1;
            }
            xs.push_back(static_cast<Symbol>(v));
        }
    }
    else
    {
        xs = generate(ProcessSpec{MarkovSpec{1, 2, {{0.9, 0.1}, {0.2, 0.8}}}, 42}, 2000).symbols();
    }

    Predictor p(EstimatorParams{});
    std::vector<Event> events;
    std::size_t shown = 0;
    for ( Symbol x : xs )
    {
        events.clear();
        p.step(x, events);
        for ( const auto &e : events )
        {
            if ( const auto *z = std::get_if<ZetaEvent>(&e))
            {
                std::printf("n=%-6zu zeta_%zu\n", p.horizon(), z->index);
                continue;
            }
            const auto &l = std::get<LambdaEvent>(e);
            // The full stream has one line per prediction time; keep the first few and then every 100th.
            if ( ++shown > 20 && l.index % 100 != 0 )
                continue;
            std::printf("n=%-6zu lambda_%zu  kappa=%zu  P(next=0)=%.3f  P(next=1)=%.3f\n", p.horizon(), l.index,
                        l.kappa, l.estimate.probability(0), l.estimate.probability(1));
        }
    }
    std::printf("%zu symbols, %zu recurrence times, %zu prediction times\n", xs.size(), p.zetas().size() - 1,
                p.lambdas().size() - 1);
}
