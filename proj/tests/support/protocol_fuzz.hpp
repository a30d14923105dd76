#pragma once

// Random canonical requests and guaranteed-invalid request lines, shared by
// the protocol unit tests and the acceptance binary.

#include "aai/protocol.hpp"
#include "aai/rng.hpp"

#include <string>

namespace aai::fuzz {

Request random_request(Rng& rng);
Response random_response(Rng& rng);

/// A line that no server may accept. Never a valid request of any kind.
std::string malformed_line(Rng& rng);

struct RoundTripReport {
    int checked = 0;
    int failures = 0;
    std::string first_failure;
};

/// serialize(parse(serialize(r))) == serialize(r) and parse(serialize(r)) == r,
/// for requests and responses.
RoundTripReport round_trip(std::uint64_t seed, int count);

struct FuzzReport {
    int malformed = 0;
    int accepted_malformed = 0;  // malformed lines answered ok:true
    int valid_steps = 0;
    int mismatches = 0;          // valid step responses differing from the in-process episode
    bool arena_matches = false;
    std::string first_problem;
};

/// Interleaves `malformed` invalid lines with valid steps on one session and
/// replays the valid steps on an in-process episode.
FuzzReport malformed_fuzz(std::uint64_t seed, int malformed, int valid_every = 10);

}  // namespace aai::fuzz
