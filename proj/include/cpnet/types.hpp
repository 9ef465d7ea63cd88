#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace cpnet {

using NodeId = int;
using Word = long long;

// CONGEST errors. Protocol bugs surface as exceptions, never as silent drops.
struct CongestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapacityViolation : CongestError { using CongestError::CongestError; };
struct PayloadOverflow : CongestError { using CongestError::CongestError; };
struct NonAdjacentSend : CongestError { using CongestError::CongestError; };
struct RoundLimitExceeded : CongestError { using CongestError::CongestError; };
struct DisconnectedGraph : CongestError { using CongestError::CongestError; };
struct ScheduleMissing : CongestError { using CongestError::CongestError; };
struct AxiomCheckFailed : CongestError { using CongestError::CongestError; };
struct DestinationOutsideCore : CongestError { using CongestError::CongestError; };
struct LoadExceeded : CongestError { using CongestError::CongestError; };
struct SparsityViolation : CongestError { using CongestError::CongestError; };
struct ModeSetTooLarge : CongestError { using CongestError::CongestError; };
struct IllegalTransition : CongestError { using CongestError::CongestError; };

// One O(log n)-bit message: a small kind tag plus at most kMaxWords word fields.
struct Payload {
    static constexpr int kMaxWords = 6;

    std::uint16_t kind = 0;
    int n_words = 0;
    std::array<Word, kMaxWords> words{};

    Payload() = default;
    Payload(std::uint16_t k, std::initializer_list<Word> ws) : kind(k) {
        if (static_cast<int>(ws.size()) > kMaxWords)
            throw PayloadOverflow("payload has more than " + std::to_string(kMaxWords) + " words");
        for (Word w : ws) words[n_words++] = w;
    }

    Word at(int i) const { return words[static_cast<std::size_t>(i)]; }
};

struct Envelope {
    NodeId src = -1;
    NodeId dst = -1;
    Payload payload;
};

// splitmix64; deterministic across platforms, which std::uniform_int_distribution is not.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next(); } while (x >= limit);
        return x % n;
    }

    Word range(Word lo, Word hi) {  // inclusive
        return lo + static_cast<Word>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent per-node stream derived from (global seed, node id).
    static Rng for_node(std::uint64_t seed, NodeId v) {
        Rng mixer(seed ^ (0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(v + 1)));
        return Rng(mixer.next());
    }
};

}  // namespace cpnet
