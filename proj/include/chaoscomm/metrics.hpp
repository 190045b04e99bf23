#pragma once

#include <cstdint>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

/// Joint counts of transmitted versus decoded symbols over one user's
/// alphabet.
class ConfusionTable {
public:
    explicit ConfusionTable(int n_symbols);

    void add(int sent, int decoded);
    long count(int sent, int decoded) const;
    long total() const { return total_; }
    int alphabet() const { return n_; }

private:
    int n_;
    std::vector<long> counts_;
    long total_ = 0;
};

/// Plug-in mutual information I(b; b~) = H(b) - H(b | b~) in bits per
/// period, with the 0 log 0 = 0 convention.  Throws EmptyTable on an empty
/// table.
double mutual_information(const ConfusionTable& table);

/// Entropy of the marginal over sent symbols, bits.
double sent_entropy(const ConfusionTable& table);
/// Entropy of the marginal over decoded symbols, bits.
double decoded_entropy(const ConfusionTable& table);

/// C = 0.5 log2(1 + SNR) with the SNR entering as a power ratio,
/// bits per period.
double shannon_capacity(double snr_db);

struct UserRate {
    int freq_multiplier;
    double beta_base;
};

/// Encoding capacity of the composed signal, sum_k f^(k) beta_base^(k), in
/// nepits per unit time.
double encoding_capacity(const std::vector<UserRate>& users);

/// Same quantity in bits per base period (period of the f-multiplier-1 user).
double encoding_capacity_bits_per_period(const std::vector<UserRate>& users);

/// Fraction of flagged entries in an error mask.
double ber(const std::vector<std::uint8_t>& error_mask);

/// One row of an SNR sweep.
struct RateReport {
    double snr_db = 0.0;
    double info_user1 = 0.0; ///< bits/period
    double info_user2 = 0.0;
    double sum_info = 0.0;
    double capacity = 0.0;      ///< Shannon limit at this SNR
    double encoding_cap = 0.0;  ///< bits/period
    double ber1 = 0.0;
    double ber2 = 0.0;
};

} // namespace chaoscomm
