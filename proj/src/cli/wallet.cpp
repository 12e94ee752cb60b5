#include "pollchain/cli/wallet.hpp"

#include <algorithm>
#include <iomanip>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "pollchain/cli/wallet_file.hpp"
#include "pollchain/crypto/base58.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::cli {

namespace {

using nlohmann::json;

struct Globals {
    std::string node = "http://127.0.0.1:8645";
    std::string wallet = "wallet.json";
    std::string passphrase_env = "POLLCHAIN_PASSPHRASE";
    std::string token_env = "POLLCHAIN_TOKEN";
    bool json = false;
};

struct Reply {
    int status = 0;  // 0 = transport failure
    json body;
    std::string transport_error;

    bool ok() const { return status >= 200 && status < 300; }
};

class Session {
public:
    Session(const Globals& g, std::ostream& out, std::ostream& err, const EnvLookup& env)
        : g_(g), out_(out), err_(err), env_(env) {}

    std::ostream& out() { return out_; }
    bool json_mode() const { return g_.json; }

    int local_error(const std::string& message) {
        err_ << "error: " << message << "\n";
        return kExitLocal;
    }

    /// Prints the node's error code and message as received.
    int server_error(const Reply& r) {
        if (r.status == 0) {
            err_ << "error: cannot reach node at " << g_.node << ": " << r.transport_error << "\n";
            return kExitServer;
        }
        if (g_.json) out_ << r.body.dump() << "\n";
        err_ << "error: " << r.status << " " << r.body.value("error", std::string("HTTP_ERROR"));
        if (r.body.contains("message")) err_ << ": " << r.body["message"].get<std::string>();
        err_ << "\n";
        return kExitServer;
    }

    Reply get(const std::string& path) { return wrap(client().Get(path)); }
    Reply post(const std::string& path, const std::string& body) { return wrap(client().Post(path, body, "text/plain")); }

    Result<std::string, int> passphrase() {
        auto p = env_(g_.passphrase_env.c_str());
        if (!p) return fail(local_error("set " + g_.passphrase_env + " to the wallet passphrase"));
        if (p->empty()) return fail(local_error(g_.passphrase_env + " is empty"));
        return *p;
    }

    Result<WalletFile, int> wallet_file() {
        auto w = WalletFile::load(g_.wallet);
        if (!w) return fail(local_error(w.error()));
        return w.value();
    }

    Result<crypto::KeyPair, int> unlock() {
        auto w = wallet_file();
        if (!w) return fail(w.error());
        auto pass = passphrase();
        if (!pass) return fail(pass.error());
        auto key = w->unlock(pass.value());
        if (!key) return fail(local_error(key.error()));
        return key.value();
    }

    /// GET /status; the node picks the timestamp so that manual clocks work.
    Result<json, int> status() {
        auto r = get("/status");
        if (!r.ok()) return fail(server_error(r));
        return r.body;
    }

    int submit(const tx::Transaction& t, const std::string& label) {
        auto bytes = tx::full_bytes(t);
        if (!bytes) return local_error(std::string(tx::to_string(bytes.error())));
        auto r = post("/transactions", to_hex(bytes.value()));
        if (!r.ok()) return server_error(r);
        if (g_.json) {
            out_ << r.body.dump() << "\n";
        } else {
            out_ << label << " " << r.body.at("tx_id").get<std::string>() << "\n";
        }
        return kExitOk;
    }

private:
    httplib::Client client() {
        httplib::Client c(g_.node);
        c.set_connection_timeout(5);
        c.set_read_timeout(30);
        if (auto token = env_(g_.token_env.c_str())) c.set_bearer_token_auth(*token);
        return c;
    }

    static Reply wrap(const httplib::Result& r) {
        Reply out;
        if (!r) {
            out.transport_error = httplib::to_string(r.error());
            return out;
        }
        out.status = r->status;
        out.body = json::parse(r->body, nullptr, false);
        if (out.body.is_discarded() || (!out.body.is_object() && !out.body.is_array())) out.body = json::object();
        return out;
    }

    const Globals& g_;
    std::ostream& out_;
    std::ostream& err_;
    const EnvLookup& env_;
};

std::optional<Hash256> parse_id(const std::string& text) {
    auto bytes = crypto::base58_decode(text);
    if (!bytes || bytes->size() != 32) return std::nullopt;
    Hash256 out{};
    std::copy(bytes->begin(), bytes->end(), out.begin());
    return out;
}

std::optional<tx::WeightModel> parse_model(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return c == '-' ? '_' : std::toupper(c); });
    for (auto m : {tx::WeightModel::Account, tx::WeightModel::AccountBalance, tx::WeightModel::AssetBalance,
                   tx::WeightModel::CurrencyBalance})
        if (tx::to_string(m) == s) return m;
    return std::nullopt;
}

std::optional<std::pair<std::int32_t, std::int32_t>> parse_range(const std::string& s) {
    auto colon = s.find(':', s[0] == '-' ? 1 : 0);
    if (colon == std::string::npos) return std::nullopt;
    try {
        std::size_t a = 0, b = 0;
        auto lo = std::stoi(s.substr(0, colon), &a);
        auto hi = std::stoi(s.substr(colon + 1), &b);
        if (a != colon || b != s.size() - colon - 1) return std::nullopt;
        return std::make_pair(lo, hi);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// ---- commands ----------------------------------------------------------------

int wallet_new(Session& s, const Globals& g, const std::string& out_file) {
    auto file = out_file.empty() ? g.wallet : out_file;
    auto pass = s.passphrase();
    if (!pass) return pass.error();
    Hash256 seed{};
    crypto::random_bytes(seed);
    auto w = WalletFile::seal(seed, pass.value());
    std::fill(seed.begin(), seed.end(), 0);
    if (!w) return s.local_error(w.error());
    if (auto r = w->save_new(file); !r) return s.local_error(r.error());
    if (s.json_mode()) {
        s.out() << json{{"address", w->address.to_string()}, {"public_key", crypto::base58_encode(w->public_key)}, {"file", file}}.dump()
                << "\n";
    } else {
        s.out() << w->address.to_string() << "\n";
    }
    return kExitOk;
}

int wallet_show(Session& s) {
    auto key = s.unlock();
    if (!key) return key.error();
    auto addr = crypto::Address::from_public_key(key->public_key());
    if (s.json_mode()) {
        s.out() << json{{"address", addr.to_string()}, {"public_key", crypto::base58_encode(key->public_key())}}.dump() << "\n";
    } else {
        s.out() << "address     " << addr.to_string() << "\n"
                << "public key  " << crypto::base58_encode(key->public_key()) << "\n";
    }
    return kExitOk;
}

int account(Session& s, const std::string& address) {
    std::string target = address;
    if (target.empty()) {
        auto w = s.wallet_file();
        if (!w) return w.error();
        target = w->address.to_string();
    } else if (auto a = crypto::Address::from_string(target); !a) {
        return s.local_error(target + ": " + std::string(crypto::to_string(a.error())));
    }
    auto r = s.get("/accounts/" + target);
    if (!r.ok()) return s.server_error(r);
    if (s.json_mode()) {
        s.out() << r.body.dump() << "\n";
        return kExitOk;
    }
    s.out() << "address  " << target << "\n";
    if (r.body["balances"].empty()) s.out() << "(no balances)\n";
    for (const auto& [asset, amount] : r.body["balances"].items()) s.out() << std::left << std::setw(46) << asset << amount << "\n";
    return kExitOk;
}

struct TransferArgs {
    std::string to;
    std::int64_t amount = 0;
    std::int64_t fee = 1;
    std::string asset;
};

int transfer(Session& s, const TransferArgs& a) {
    auto to = crypto::Address::from_string(a.to);
    if (!to) return s.local_error("--to: " + std::string(crypto::to_string(to.error())));
    tx::TransferTx t;
    if (!a.asset.empty()) {
        auto id = parse_id(a.asset);
        if (!id) return s.local_error("--asset is not a base-58 asset id");
        t.asset_id = *id;
    }
    auto key = s.unlock();
    if (!key) return key.error();
    auto st = s.status();
    if (!st) return st.error();
    t.sender = key->public_key();
    t.recipient = to.value();
    t.amount = a.amount;
    t.fee = a.fee;
    t.timestamp = st->at("suggested_timestamp_ms").get<std::int64_t>();
    if (auto v = tx::validate_stateless(t); !v) return s.local_error(std::string(tx::to_string(v.error())));
    auto signed_tx = tx::sign_tx(key.value(), t);
    if (!signed_tx) return s.local_error(std::string(tx::to_string(signed_tx.error())));
    return s.submit(signed_tx.value(), "tx_id");
}

struct PollArgs {
    std::string question;
    std::vector<std::string> answers;
    std::string range = "1:1";
    std::string model = "ACCOUNT";
    std::string weight_asset;
    std::vector<std::string> whitelist;
    std::optional<std::int64_t> min_balance;
    std::string min_balance_asset;
    std::uint64_t close_slot = 0;
    std::optional<std::uint64_t> snapshot_height;
    std::int64_t fee = 1;
};

int poll_create(Session& s, const PollArgs& a) {
    tx::PollCreationTx p;
    p.question = to_bytes(a.question);
    for (const auto& label : a.answers) p.answers.push_back(to_bytes(label));
    auto range = parse_range(a.range);
    if (!range) return s.local_error("--range expects MIN:MAX, got " + a.range);
    p.score_min = range->first;
    p.score_max = range->second;
    auto model = parse_model(a.model);
    if (!model) return s.local_error("unknown --model " + a.model);
    p.weight_model = *model;
    if (!a.weight_asset.empty()) {
        auto id = parse_id(a.weight_asset);
        if (!id) return s.local_error("--weight-asset is not a base-58 asset id");
        p.weight_asset_id = *id;
    }
    if (!a.whitelist.empty() && a.min_balance) return s.local_error("--whitelist and --min-balance are exclusive");
    if (!a.whitelist.empty()) {
        tx::Whitelist w;
        for (const auto& text : a.whitelist) {
            auto addr = crypto::Address::from_string(text);
            if (!addr) return s.local_error("--whitelist " + text + ": " + std::string(crypto::to_string(addr.error())));
            w.voters.push_back(addr.value());
        }
        p.eligibility = w;
    } else if (a.min_balance) {
        tx::MinBalance m;
        m.threshold = *a.min_balance;
        if (!a.min_balance_asset.empty()) {
            auto id = parse_id(a.min_balance_asset);
            if (!id) return s.local_error("--min-balance-asset is not a base-58 asset id");
            m.asset = *id;
        }
        p.eligibility = m;
    }
    p.close_slot = a.close_slot;
    p.fee = a.fee;
    if (auto v = tx::validate_stateless(p); !v) return s.local_error(std::string(tx::to_string(v.error())));

    auto key = s.unlock();
    if (!key) return key.error();
    auto st = s.status();
    if (!st) return st.error();
    p.sender = key->public_key();
    p.timestamp = st->at("suggested_timestamp_ms").get<std::int64_t>();
    p.snapshot_height = a.snapshot_height.value_or(st->at("height").get<std::uint64_t>());
    auto signed_tx = tx::sign_tx(key.value(), p);
    if (!signed_tx) return s.local_error(std::string(tx::to_string(signed_tx.error())));
    return s.submit(signed_tx.value(), "poll_id");
}

int poll_show(Session& s, const std::string& poll) {
    auto r = s.get("/polls/" + poll);
    if (!r.ok()) return s.server_error(r);
    const auto& p = r.body;
    if (s.json_mode()) {
        s.out() << p.dump() << "\n";
        return kExitOk;
    }
    s.out() << p["question"].get<std::string>() << "\n"
            << "status " << p["status"].get<std::string>() << ", closes after slot " << p["close_slot"] << ", model "
            << p["weight_model"].get<std::string>() << ", scores " << p["score_min"] << ".." << p["score_max"] << "\n";
    for (const auto& a : p["answers"])
        s.out() << "  [" << a["index"] << "] " << a["label"].get<std::string>() << "  " << a["address"].get<std::string>() << "\n";
    s.out() << "  blank  " << p["poll_address"].get<std::string>() << "\n";
    return kExitOk;
}

int poll_results(Session& s, const std::string& poll) {
    auto r = s.get("/polls/" + poll + "/results");
    if (r.status == 423) {
        if (s.json_mode()) s.out() << r.body.dump() << "\n";
        s.out() << "locked until slot " << r.body.value("close_slot", std::uint64_t{0}) << " has passed\n";
        return kExitServer;
    }
    if (!r.ok()) return s.server_error(r);
    if (s.json_mode()) {
        s.out() << r.body.dump() << "\n";
        return kExitOk;
    }
    s.out() << std::left << std::setw(6) << "index" << std::setw(24) << "answer" << std::setw(24) << "total" << "votes\n";
    for (const auto& a : r.body["answers"])
        s.out() << std::left << std::setw(6) << a["index"].get<int>() << std::setw(24) << a["label"].get<std::string>()
                << std::setw(24) << a["total"].get<std::string>() << a["counted_votes"].get<std::uint64_t>() << "\n";
    s.out() << "blank votes " << r.body["blank_votes"] << "\n";
    return kExitOk;
}

struct VoteArgs {
    std::string poll;
    int answer = -1;
    std::int32_t score = 1;
    bool blank = false;
    std::int64_t fee = 1;
};

int vote_cast(Session& s, const VoteArgs& a) {
    auto poll = parse_id(a.poll);
    if (!poll) return s.local_error("--poll is not a base-58 poll id");
    tx::VotePayload v{*poll, tx::kBlankAnswer, 0};
    if (!a.blank) {
        if (a.answer < 0 || a.answer >= static_cast<int>(tx::kMaxAnswers))
            return s.local_error("--answer must be in [0, " + std::to_string(tx::kMaxAnswers - 1) + "] unless --blank");
        v.answer_index = static_cast<std::uint8_t>(a.answer);
        v.score = a.score;
    }
    auto key = s.unlock();
    if (!key) return key.error();
    auto st = s.status();
    if (!st) return st.error();
    auto body = tx::make_vote(key->public_key(), v, a.fee, st->at("suggested_timestamp_ms").get<std::int64_t>());
    if (auto check = tx::validate_stateless(body); !check) return s.local_error(std::string(tx::to_string(check.error())));
    auto signed_tx = tx::sign_tx(key.value(), body);
    if (!signed_tx) return s.local_error(std::string(tx::to_string(signed_tx.error())));
    return s.submit(signed_tx.value(), "tx_id");
}

int vote_verify(Session& s, const std::string& id) {
    auto r = s.get("/transactions/" + id);
    if (r.status == 404) {
        if (s.json_mode()) s.out() << r.body.dump() << "\n";
        s.out() << "not found\n";
        return kExitServer;
    }
    if (!r.ok()) return s.server_error(r);
    if (s.json_mode()) {
        s.out() << r.body.dump() << "\n";
    } else if (r.body.value("found", false)) {
        s.out() << "included at height " << r.body["height"] << " (" << r.body["confirmations"] << " confirmations)\n";
    } else {
        s.out() << "pending in mempool\n";
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Poll chain wallet", "pollchain-wallet"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--node", g.node, "Node base URL")->capture_default_str();
    app.add_option("--wallet", g.wallet, "Wallet file")->capture_default_str();
    app.add_option("--passphrase-env", g.passphrase_env, "Environment variable holding the passphrase")->capture_default_str();
    app.add_option("--token-env", g.token_env, "Environment variable holding the API bearer token")->capture_default_str();
    app.add_flag("--json", g.json, "Machine-readable output");

    std::function<int(Session&)> action;

    auto* wallet = app.add_subcommand("wallet", "Key management")->require_subcommand(1);
    std::string out_file;
    auto* wnew = wallet->add_subcommand("new", "Create an encrypted wallet file");
    wnew->add_option("--out", out_file, "Wallet file to create (defaults to --wallet)");
    wnew->callback([&] { action = [&](Session& s) { return wallet_new(s, g, out_file); }; });
    wallet->add_subcommand("show", "Unlock and print the wallet address")->callback([&] {
        action = [](Session& s) { return wallet_show(s); };
    });

    std::string address;
    auto* acct = app.add_subcommand("account", "Balances of an address (default: the wallet)");
    acct->add_option("address", address);
    acct->callback([&] { action = [&](Session& s) { return account(s, address); }; });

    TransferArgs ta;
    auto* xfer = app.add_subcommand("transfer", "Send tokens");
    xfer->add_option("--to", ta.to)->required();
    xfer->add_option("--amount", ta.amount)->required();
    xfer->add_option("--fee", ta.fee)->capture_default_str();
    xfer->add_option("--asset", ta.asset, "Asset id; native token when absent");
    xfer->callback([&] { action = [&](Session& s) { return transfer(s, ta); }; });

    auto* poll = app.add_subcommand("poll", "Poll operations")->require_subcommand(1);
    PollArgs pa;
    auto* pcreate = poll->add_subcommand("create", "Create a poll");
    pcreate->add_option("--question", pa.question)->required();
    pcreate->add_option("--answers", pa.answers, "Comma-separated answer labels")->required()->delimiter(',');
    pcreate->add_option("--range", pa.range, "Score range MIN:MAX")->capture_default_str();
    pcreate->add_option("--model", pa.model, "ACCOUNT, ACCOUNT_BALANCE, ASSET_BALANCE or CURRENCY_BALANCE")->capture_default_str();
    pcreate->add_option("--weight-asset", pa.weight_asset);
    pcreate->add_option("--whitelist", pa.whitelist, "Comma-separated voter addresses")->delimiter(',');
    pcreate->add_option("--min-balance", pa.min_balance);
    pcreate->add_option("--min-balance-asset", pa.min_balance_asset);
    pcreate->add_option("--close-slot", pa.close_slot)->required();
    pcreate->add_option("--snapshot-height", pa.snapshot_height, "Defaults to the current height");
    pcreate->add_option("--fee", pa.fee)->capture_default_str();
    pcreate->callback([&] { action = [&](Session& s) { return poll_create(s, pa); }; });
    std::string poll_id;
    auto* pshow = poll->add_subcommand("show", "Public poll descriptor");
    pshow->add_option("--poll", poll_id)->required();
    pshow->callback([&] { action = [&](Session& s) { return poll_show(s, poll_id); }; });
    auto* presults = poll->add_subcommand("results", "Final tally once the poll has closed");
    presults->add_option("--poll", poll_id)->required();
    presults->callback([&] { action = [&](Session& s) { return poll_results(s, poll_id); }; });

    auto* vote = app.add_subcommand("vote", "Voting")->require_subcommand(1);
    VoteArgs va;
    auto* cast = vote->add_subcommand("cast", "Sign and submit a vote");
    cast->add_option("--poll", va.poll)->required();
    auto* answer_opt = cast->add_option("--answer", va.answer);
    cast->add_option("--score", va.score)->capture_default_str();
    auto* blank_opt = cast->add_flag("--blank", va.blank, "Blank vote");
    answer_opt->excludes(blank_opt);
    cast->add_option("--fee", va.fee)->capture_default_str();
    cast->callback([&] { action = [&](Session& s) { return vote_cast(s, va); }; });
    std::string tx_id;
    auto* verify = vote->add_subcommand("verify", "Check whether a transaction is on the canonical chain");
    verify->add_option("--tx", tx_id)->required();
    verify->callback([&] { action = [&](Session& s) { return vote_verify(s, tx_id); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitLocal;
    }
    if (!action) return kExitLocal;
    Session session(g, out, err, env);
    return action(session);
}

}  // namespace pollchain::cli
