#include "qd/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qd {

Evaluator::Evaluator(const Domain& domain, std::size_t workers)
    : domain_(domain), workers_(std::max<std::size_t>(workers, 1))
{
}

std::vector<Evaluation> Evaluator::evaluate(std::span<const Genome> genomes) const
{
    std::vector<Evaluation> out(genomes.size());
    const std::size_t threads = std::min(workers_, genomes.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < genomes.size(); ++i)
            out[i] = domain_.evaluate(genomes[i]);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < genomes.size(); i = next++) {
            try {
                out[i] = domain_.evaluate(genomes[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

} // namespace qd
