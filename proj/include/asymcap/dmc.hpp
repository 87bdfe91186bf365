#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "asymcap/rng.hpp"

namespace asymcap {

// Probability distribution over the channel input alphabet.
struct InputDist {
    std::vector<double> p;

    InputDist() = default;
    explicit InputDist(std::vector<double> probs);

    int size() const { return static_cast<int>(p.size()); }
    double operator[](int x) const { return p[static_cast<std::size_t>(x)]; }

    static InputDist uniform(int k);
    static InputDist point_mass(int k, int x);
};

// Finite discrete memoryless channel W(y|x), stored row-major by input.
// Output symbols that no input can produce are pruned at construction;
// kept_outputs records the original index of each surviving column.
class Dmc {
public:
    Dmc(int input_size, int output_size, std::vector<double> w);

    int input_size() const { return input_size_; }
    int output_size() const { return output_size_; }
    double at(int x, int y) const {
        return w_[static_cast<std::size_t>(x) * output_size_ + y];
    }
    const std::vector<double>& matrix() const { return w_; }
    const std::vector<int>& kept_outputs() const { return kept_outputs_; }

    int sample(int x, Rng& rng) const;

    static Dmc bsc(double p);
    static Dmc bec(double eps);
    static Dmc zchannel(double q);
    // Binary asymmetric channel: flip probability p0 for input 0, p1 for input 1.
    static Dmc bac(double p0, double p1);
    static Dmc identity(int k);

    // Accepts a preset spec such as "bsc(0.11)" or "bac(0.02,0.2)", a path to
    // a JSON file, or inline JSON.
    static Dmc from_spec(const std::string& spec);
    static Dmc from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;

private:
    int input_size_;
    int output_size_;
    std::vector<double> w_;
    std::vector<int> kept_outputs_;
};

double binary_entropy(double x);                  // h2, bits
double entropy_bits(const std::vector<double>& p);
double entropy_bits(const InputDist& p);

double mutual_information(const Dmc& ch, const InputDist& p);
double conditional_entropy_x_given_y(const Dmc& ch, const InputDist& p);
double total_variation(const InputDist& a, const InputDist& b);

struct InfoReport {
    double mutual_information = 0;             // I at the reported optimal input
    double capacity = 0;                        // == mutual_information
    double symmetric_capacity = 0;              // I at the uniform input
    InputDist optimal_input;
    double conditional_entropy_x_given_y = 0;   // H(X|Y) at the optimal input
    int iterations = 0;
    double bracket_gap = 0;                     // certified upper-lower gap
};

// Blahut-Arimoto alternating maximization. Stops when the standard
// upper/lower capacity bracket closes below tol; throws after 1e5 iterations.
InfoReport capacity(const Dmc& ch, double tol);

}  // namespace asymcap
