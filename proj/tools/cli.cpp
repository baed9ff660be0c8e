#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vla/container.hpp"
#include "vla/errors.hpp"
#include "vla/storage.hpp"

namespace vla::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for problems with the command line itself (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Input {
    Alphabet alphabet = Alphabet::bytes();
    std::vector<Letter> letters;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::istringstream in(text);
    return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

Input load_input(const fs::path& path, bool tokens) {
    const std::string text = read_file(path);
    Input input;
    if (!tokens) {
        input.letters.reserve(text.size());
        for (unsigned char c : text) {
            input.letters.push_back(c);
        }
    } else {
        const auto words = split_tokens(text);
        if (words.empty()) {
            throw EmptyInputError("empty input");
        }
        input.alphabet = Alphabet::from_tokens(words);
        input.letters.reserve(words.size());
        for (const auto& w : words) {
            input.letters.push_back(input.alphabet.letter_of(w));
        }
    }
    if (input.letters.empty()) {
        throw EmptyInputError("empty input");
    }
    return input;
}

fs::path sidecar_path(const fs::path& container) {
    return fs::path(container.string() + ".tokens");
}

void write_sidecar(const fs::path& container, const Alphabet& alphabet) {
    std::ofstream out(sidecar_path(container), std::ios::binary | std::ios::trunc);
    out << "vla-tokens " << alphabet.size() << '\n';
    for (const auto& s : alphabet.symbols()) {
        out << s << '\n';
    }
    if (!out) {
        throw Error("cannot write " + sidecar_path(container).string());
    }
}

// Token list saved next to a container built with --tokens, if any.
std::optional<std::vector<std::string>> read_sidecar(const fs::path& container) {
    const fs::path path = sidecar_path(container);
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    std::ifstream in(path, std::ios::binary);
    std::string tag;
    std::size_t count = 0;
    in >> tag >> count;
    if (!in || tag != "vla-tokens") {
        throw CorruptionError("bad token list " + path.string());
    }
    std::string line;
    std::getline(in, line);
    std::vector<std::string> symbols;
    symbols.reserve(count);
    while (symbols.size() < count && std::getline(in, line)) {
        symbols.push_back(line);
    }
    if (symbols.size() != count) {
        throw CorruptionError("truncated token list " + path.string());
    }
    return symbols;
}

std::uint64_t default_blocks(std::uint64_t n) {
    // m = N / log N
    const unsigned lg = std::max(1u, ceil_log2(n));
    return std::max<std::uint64_t>(1, n / lg);
}

std::uint64_t variant_param(Variant v, std::uint64_t n, std::optional<std::uint64_t> m,
                            std::optional<std::uint64_t> big_m) {
    if (v == Variant::Blocked) {
        if (big_m) {
            if (*big_m == 0) {
                throw UsageError("--M must be positive");
            }
            return (n + *big_m - 1) / *big_m;
        }
        const std::uint64_t blocks = m.value_or(default_blocks(n));
        if (blocks == 0) {
            throw UsageError("--m must be positive");
        }
        return std::min(blocks, n);
    }
    if (v == Variant::Superletter) {
        if (m) {
            throw UsageError("superletter takes --M, not --m");
        }
        const std::uint64_t len = big_m.value_or(4);
        if (len == 0) {
            throw UsageError("--M must be positive");
        }
        return std::min(len, n);
    }
    if (m || big_m) {
        throw UsageError("--m/--M only apply to blocked and superletter");
    }
    return 0;
}

json stats_json(const StorageStats& s) {
    json j;
    j["variant"] = std::string(variant_name(s.variant));
    j["letters"] = s.letters;
    j["alphabet_size"] = s.alphabet_size;
    j["z_bits"] = s.z_bits;
    j["index_bits"] = s.index_bits;
    j["codebook_bits"] = s.codebook_bits;
    j["payload_bits"] = s.payload_bits;
    j["total_bits"] = s.total_bits;
    j["bits_per_letter"] = s.bits_per_letter;
    j["total_bits_per_letter"] = s.total_bits_per_letter;
    j["empirical_h1"] = s.empirical_h1;
    j["bound_bits"] = s.bound_bits;
    j["slack"] = s.slack;
    if (s.variant == Variant::Blocked || s.variant == Variant::Superletter) {
        j["block_len"] = s.block_len;
        j["blocks"] = s.blocks;
    }
    if (s.variant == Variant::Superletter) {
        j["empirical_hM"] = s.empirical_hM;
        j["measured_constant"] = s.measured_constant;
    }
    return j;
}

void print_stats(std::ostream& out, const StorageStats& s, bool as_json) {
    if (as_json) {
        out << stats_json(s).dump() << '\n';
        return;
    }
    out << std::fixed << std::setprecision(4);
    out << "variant=" << variant_name(s.variant) << " N=" << s.letters << " L=" << s.alphabet_size
        << " z_bits=" << s.z_bits << " index_bits=" << s.index_bits
        << " codebook_bits=" << s.codebook_bits << " bits_per_letter=" << s.bits_per_letter
        << " total_bits_per_letter=" << s.total_bits_per_letter << " h1=" << s.empirical_h1;
    if (s.variant == Variant::Blocked || s.variant == Variant::Superletter) {
        out << " M=" << s.block_len << " m=" << s.blocks;
    }
    if (s.variant == Variant::Superletter) {
        out << " hM=" << s.empirical_hM << " C=" << s.measured_constant;
    }
    out << " bound_bits=" << s.bound_bits << " slack=" << s.slack << '\n';
    out.unsetf(std::ios::floatfield);
}

// ---------------------------------------------------------------------------

struct BuildOptions {
    std::string input;
    std::string output;
    std::string variant = "sigma-bit";
    std::optional<std::uint64_t> m;
    std::optional<std::uint64_t> big_m;
    bool tokens = false;
    bool json = false;
};

int cmd_build(const BuildOptions& o, std::ostream& out) {
    const auto v = parse_variant(o.variant);
    if (!v) {
        throw UsageError("unknown variant " + o.variant);
    }
    const Input input = load_input(o.input, o.tokens);
    const std::uint64_t param = variant_param(*v, input.letters.size(), o.m, o.big_m);
    const CompressedSequence cs =
        build_variant(*v, input.letters, input.alphabet.size(), param);
    write_container(o.output, cs);
    if (o.tokens) {
        write_sidecar(o.output, input.alphabet);
    } else if (fs::exists(sidecar_path(o.output))) {
        fs::remove(sidecar_path(o.output));
    }
    print_stats(out, stats(cs), o.json);
    return kOk;
}

struct GetOptions {
    std::string container;
    std::uint64_t index = 0;
    std::uint64_t count = 1;
    bool json = false;
};

int cmd_get(const GetOptions& o, std::ostream& out, std::ostream& err) {
    const CompressedSequence cs = read_container(o.container);
    const auto symbols = read_sidecar(o.container);
    const std::uint64_t n = cs.size();
    if (o.index < 1 || o.index > n || o.count > n - o.index + 1) {
        err << "index out of range: " << o.index;
        if (o.count != 1) {
            err << " (count " << o.count << ")";
        }
        err << ", N = " << n << '\n';
        return kFailure;
    }
    std::vector<Letter> letters;
    letters.reserve(o.count);
    for (std::uint64_t i = o.index; i < o.index + o.count; ++i) {
        letters.push_back(cs.access(i));
    }
    if (o.json) {
        json j;
        j["index"] = o.index;
        j["letters"] = letters;
        if (symbols) {
            json words = json::array();
            for (Letter a : letters) {
                words.push_back(symbols->at(a));
            }
            j["tokens"] = words;
        }
        out << j.dump() << '\n';
    } else if (symbols) {
        for (Letter a : letters) {
            out << symbols->at(a) << '\n';
        }
    } else if (cs.alphabet_size() == 256) {
        for (Letter a : letters) {
            out.put(static_cast<char>(a));
        }
    } else {
        for (Letter a : letters) {
            out << a << '\n';
        }
    }
    return kOk;
}

struct VerifyOptions {
    std::string container;
    std::string original;
    std::optional<std::uint64_t> sample;
    std::uint64_t seed = 1;
    bool json = false;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    const CompressedSequence cs = read_container(o.container);
    const auto symbols = read_sidecar(o.container);
    // Tokens missing from the container alphabet get a letter no access returns.
    std::vector<Letter> expected;
    if (symbols) {
        std::unordered_map<std::string, Letter> ids;
        for (std::size_t a = 0; a < symbols->size(); ++a) {
            ids.emplace((*symbols)[a], static_cast<Letter>(a));
        }
        for (const auto& w : split_tokens(read_file(o.original))) {
            auto it = ids.find(w);
            expected.push_back(it == ids.end() ? std::numeric_limits<Letter>::max() : it->second);
        }
    } else {
        for (unsigned char c : read_file(o.original)) {
            expected.push_back(c);
        }
    }

    std::vector<std::uint64_t> probes;
    if (o.sample) {
        std::mt19937_64 rng(o.seed);
        std::uniform_int_distribution<std::uint64_t> pick(1, cs.size());
        probes.resize(*o.sample);
        for (auto& p : probes) {
            p = pick(rng);
        }
        std::sort(probes.begin(), probes.end());
    } else {
        probes.resize(cs.size());
        for (std::uint64_t i = 0; i < cs.size(); ++i) {
            probes[i] = i + 1;
        }
    }

    std::uint64_t checked = 0;
    std::uint64_t bad_index = 0;
    std::string problem;
    if (expected.size() != cs.size()) {
        problem = "length differs: container has " + std::to_string(cs.size()) +
                  " letters, original has " + std::to_string(expected.size());
    } else {
        for (std::uint64_t i : probes) {
            ++checked;
            if (cs.access(i) != expected[i - 1]) {
                bad_index = i;
                problem = "mismatch at index " + std::to_string(i);
                break;
            }
        }
    }

    const bool ok = problem.empty();
    if (o.json) {
        json j;
        j["ok"] = ok;
        j["checked"] = checked;
        j["letters"] = cs.size();
        if (bad_index != 0) {
            j["first_mismatch"] = bad_index;
        }
        if (!ok) {
            j["error"] = problem;
        }
        out << j.dump() << '\n';
    } else if (ok) {
        out << "ok: " << checked << " of " << cs.size() << " letters checked\n";
    }
    if (!ok) {
        err << problem << '\n';
        return kFailure;
    }
    return kOk;
}

struct StatsOptions {
    std::string container;
    bool json = false;
};

int cmd_stats(const StatsOptions& o, std::ostream& out) {
    print_stats(out, stats(read_container(o.container)), o.json);
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
    std::string input;
    bool tokens = false;
    bool json = false;
    std::uint64_t probes = 1000;
    unsigned threads = 2;
    std::uint64_t seed = 1;
};

struct BenchCell {
    Variant variant;
    std::uint64_t param = 0;
    std::string setting;
};

struct BenchRow {
    BenchCell cell;
    StorageStats stats;
    std::uint64_t probes = 0;
    double avg_words = 0;
    std::uint64_t max_words = 0;
    std::uint64_t words_at_last = 0;  // words touched by access(N)
    std::uint64_t word_limit = 0;     // counter bound for this variant
    double ns_per_access = 0;
};

std::vector<BenchCell> bench_grid(std::uint64_t n) {
    std::vector<BenchCell> cells = {
        {Variant::Fixed, 0, "-"}, {Variant::SigmaTr, 0, "-"}, {Variant::SigmaBit, 0, "-"}};
    for (double alpha : {0.25, 0.5, 0.75}) {
        const auto len = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(n), alpha))));
        std::ostringstream name;
        name << "M=N^" << alpha;
        cells.push_back({Variant::Blocked, (n + len - 1) / len, name.str()});
    }
    cells.push_back({Variant::Blocked, default_blocks(n), "m=N/logN"});
    std::vector<std::uint64_t> lens = {1, 2, 4, 8};
    const std::uint64_t log_n = std::max(1u, ceil_log2(n));
    if (std::find(lens.begin(), lens.end(), log_n) == lens.end()) {
        lens.push_back(log_n);
    }
    for (std::uint64_t len : lens) {
        if (len <= n) {
            cells.push_back({Variant::Superletter, len,
                             len == log_n ? "M=logN=" + std::to_string(len)
                                          : "M=" + std::to_string(len)});
        }
    }
    return cells;
}

std::uint64_t word_limit(const CompressedSequence& cs) {
    const std::uint64_t n = cs.size();
    switch (cs.variant()) {
        case Variant::Fixed:
            return 0;
        case Variant::SigmaTr:
            return n - 1;
        case Variant::SigmaBit:
            return ceil_log2(n) + 1;
        case Variant::Blocked:
            return ceil_log2(cs.block_len()) + 2;
        case Variant::Superletter:
            return ceil_log2(cs.block_count()) + 1;
    }
    return 0;
}

BenchRow run_cell(const BenchCell& cell, const Input& input, const BenchOptions& o) {
    BenchRow row{cell, {}, 0, 0, 0, 0, 0, 0};
    const std::uint64_t n = input.letters.size();
    const CompressedSequence cs =
        build_variant(cell.variant, input.letters, input.alphabet.size(), cell.param);
    row.stats = stats(cs);
    row.word_limit = word_limit(cs);

    // The flat-length variant costs O(i) per access; keep its probe budget sane.
    std::uint64_t count = o.probes;
    if (cell.variant == Variant::SigmaTr) {
        count = std::min<std::uint64_t>(count, std::max<std::uint64_t>(16, 50'000'000 / n));
    }
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::uint64_t> pick(1, n);
    std::vector<std::uint64_t> probes(count);
    for (auto& p : probes) {
        p = pick(rng);
    }
    row.probes = count;

    std::uint64_t total_words = 0;
    for (std::uint64_t i : probes) {
        AccessCounter c;
        if (cs.access(i, &c) != input.letters[i - 1]) {
            throw Error("bench: wrong letter at index " + std::to_string(i) + " for " +
                        std::string(variant_name(cell.variant)));
        }
        total_words += c.index_words;
        row.max_words = std::max(row.max_words, c.index_words);
    }
    row.avg_words = count ? static_cast<double>(total_words) / static_cast<double>(count) : 0;
    AccessCounter last;
    cs.access(n, &last);
    row.words_at_last = last.index_words;

    // Concurrent timed pass over the same probes, repeated so thread start-up
    // does not dominate.
    const unsigned threads = std::max(1u, o.threads);
    const std::uint64_t rounds =
        cell.variant == Variant::SigmaTr || count == 0 ? 1 : std::max<std::uint64_t>(1, 400'000 / count);
    std::atomic<std::uint64_t> sink{0};
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            std::uint64_t acc = 0;
            for (std::uint64_t r = 0; r < rounds; ++r) {
                for (std::size_t k = t; k < probes.size(); k += threads) {
                    acc += cs.access(probes[k]);
                }
            }
            sink += acc;
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    const auto elapsed = std::chrono::duration<double, std::nano>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    row.ns_per_access =
        count ? elapsed * threads / static_cast<double>(count * rounds) : 0;
    return row;
}

json row_json(const BenchRow& r) {
    json j;
    j["variant"] = std::string(variant_name(r.cell.variant));
    j["setting"] = r.cell.setting;
    j["N"] = r.stats.letters;
    j["L"] = r.stats.alphabet_size;
    j["block_len"] = r.stats.block_len;
    j["blocks"] = r.stats.blocks;
    j["bits_per_letter"] = r.stats.bits_per_letter;
    j["total_bits_per_letter"] = r.stats.total_bits_per_letter;
    j["slack"] = r.stats.slack;
    j["probes"] = r.probes;
    j["avg_words"] = r.avg_words;
    j["max_words"] = r.max_words;
    j["words_at_N"] = r.words_at_last;
    j["word_limit"] = r.word_limit;
    j["ns_per_access"] = r.ns_per_access;
    return j;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
    const Input input = load_input(o.input, o.tokens);
    const std::uint64_t n = input.letters.size();
    std::vector<BenchRow> rows;
    for (const auto& cell : bench_grid(n)) {
        rows.push_back(run_cell(cell, input, o));
    }
    if (o.json) {
        for (const auto& r : rows) {
            out << row_json(r).dump() << '\n';
        }
        return kOk;
    }
    out << "N=" << n << " L=" << input.alphabet.size() << " probes=" << o.probes
        << " threads=" << std::max(1u, o.threads) << '\n';
    out << std::left << std::setw(12) << "variant" << std::setw(14) << "setting" << std::right
        << std::setw(8) << "M" << std::setw(9) << "m" << std::setw(10) << "bits/let"
        << std::setw(10) << "total/let" << std::setw(14) << "slack" << std::setw(11)
        << "avg_words" << std::setw(10) << "max_words" << std::setw(10) << "words@N"
        << std::setw(8) << "limit" << std::setw(12) << "ns/access" << '\n';
    out << std::fixed;
    for (const auto& r : rows) {
        out << std::left << std::setw(12) << variant_name(r.cell.variant) << std::setw(14)
            << r.cell.setting << std::right << std::setw(8) << r.stats.block_len << std::setw(9)
            << r.stats.blocks << std::setprecision(4) << std::setw(10) << r.stats.bits_per_letter
            << std::setw(10) << r.stats.total_bits_per_letter << std::setprecision(1)
            << std::setw(14) << r.stats.slack << std::setprecision(2) << std::setw(11)
            << r.avg_words << std::setw(10) << r.max_words << std::setw(10) << r.words_at_last
            << std::setw(8) << r.word_limit << std::setprecision(1) << std::setw(12)
            << r.ns_per_access << '\n';
    }
    out.unsetf(std::ios::floatfield);
    return kOk;
}

// Every option goes through CLI11; the returned object owns the parsed values.
struct Options {
    BuildOptions build;
    GetOptions get;
    VerifyOptions verify;
    StatsOptions stats;
    BenchOptions bench;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Direct-access storage for variable-length coded sequences", "vla"};
    app.require_subcommand(1);
    Options o;

    auto* build = app.add_subcommand("build", "Encode a file into a container");
    build->add_option("input", o.build.input, "Input file")->required();
    build->add_option("output", o.build.output, "Container to write")->required();
    build->add_option("--variant", o.build.variant,
                      "fixed, sigma-tr, sigma-bit, blocked or superletter")
        ->capture_default_str();
    build->add_option("--m", o.build.m, "Number of blocks (blocked)");
    build->add_option("--M", o.build.big_m, "Block length (blocked, superletter)");
    build->add_flag("--tokens", o.build.tokens, "Whitespace-separated tokens are the letters");
    build->add_flag("--json", o.build.json, "Machine-readable output");

    auto* get = app.add_subcommand("get", "Print letters i .. i+count-1");
    get->add_option("container", o.get.container)->required();
    get->add_option("i", o.get.index, "1-based index")->required();
    get->add_option("count", o.get.count, "Number of letters")->check(CLI::PositiveNumber);
    get->add_flag("--json", o.get.json);

    auto* verify = app.add_subcommand("verify", "Check a container against the original file");
    verify->add_option("container", o.verify.container)->required();
    verify->add_option("original", o.verify.original)->required();
    verify->add_option("--sample", o.verify.sample, "Check this many random indices only");
    verify->add_option("--seed", o.verify.seed)->capture_default_str();
    verify->add_flag("--json", o.verify.json);

    auto* stat = app.add_subcommand("stats", "Print sizes and bounds of a container");
    stat->add_option("container", o.stats.container)->required();
    stat->add_flag("--json", o.stats.json);

    auto* bench = app.add_subcommand("bench", "Size and access cost across variants");
    bench->add_option("input", o.bench.input)->required();
    bench->add_flag("--tokens", o.bench.tokens);
    bench->add_flag("--json", o.bench.json, "One JSON object per line");
    bench->add_option("--probes", o.bench.probes, "Random accesses per cell")
        ->capture_default_str();
    bench->add_option("--threads", o.bench.threads, "Concurrent readers for the timing pass")
        ->capture_default_str();
    bench->add_option("--seed", o.bench.seed)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (build->parsed()) {
            return cmd_build(o.build, out);
        }
        if (get->parsed()) {
            return cmd_get(o.get, out, err);
        }
        if (verify->parsed()) {
            return cmd_verify(o.verify, out, err);
        }
        if (stat->parsed()) {
            return cmd_stats(o.stats, out);
        }
        return cmd_bench(o.bench, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace vla::cli
