#include "regclass/verilog.hpp"

#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "regclass/util.hpp"

namespace regclass {

namespace {

const std::unordered_set<std::string>& behavioral_keywords() {
    static const std::unordered_set<std::string> kw = {
        "always", "assign", "initial", "reg", "if", "else", "case", "casex", "casez",
        "begin", "end", "posedge", "negedge", "function", "task", "generate", "for",
        "while", "specify", "parameter", "localparam", "defparam",
    };
    return kw;
}

struct Token {
    enum Kind { Ident, Punct, End } kind = End;
    std::string text;
    int line = 0, col = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = Token::End;
            return t;
        }
        char c = text_[pos_];
        if (c == '\\') {
            // escaped identifier: backslash up to whitespace
            advance();
            std::string id;
            while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                id.push_back(text_[pos_]);
                advance();
            }
            if (id.empty()) fail(t.line, t.col, "empty escaped identifier");
            t.kind = Token::Ident;
            t.text = std::move(id);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '$') {
                    id.push_back(d);
                    advance();
                } else {
                    break;
                }
            }
            t.kind = Token::Ident;
            t.text = std::move(id);
            return t;
        }
        if (std::string("(),;.").find(c) != std::string::npos) {
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            advance();
            return t;
        }
        fail(line_, col_, std::string("unexpected character '") + c + "'");
    }

    [[noreturn]] static void fail(int line, int col, const std::string& msg) {
        throw_validation("verilog: " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
                advance();
            if (pos_ + 1 < text_.size() && text_[pos_] == '/' && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                continue;
            }
            if (pos_ + 1 < text_.size() && text_[pos_] == '/' && text_[pos_ + 1] == '*') {
                int l = line_, c = col_;
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size()) fail(l, c, "unterminated block comment");
                advance();
                advance();
                continue;
            }
            break;
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
public:
    Parser(const std::string& text, LibraryPtr lib) : lexer_(text), lib_(std::move(lib)) {
        tok_ = lexer_.next();
    }

    Netlist parse() {
        Netlist n;
        n.library = lib_;
        expect_keyword("module");
        n.name = expect_ident("module name");
        std::vector<std::string> header_ports;
        expect_punct("(");
        if (!is_punct(")")) {
            header_ports.push_back(expect_ident("port name"));
            while (is_punct(",")) {
                consume();
                header_ports.push_back(expect_ident("port name"));
            }
        }
        expect_punct(")");
        expect_punct(";");

        std::unordered_set<std::string> declared;
        while (!(tok_.kind == Token::Ident && tok_.text == "endmodule")) {
            if (tok_.kind == Token::End)
                Lexer::fail(tok_.line, tok_.col, "missing endmodule");
            if (tok_.kind != Token::Ident)
                Lexer::fail(tok_.line, tok_.col, "expected declaration or instantiation");
            if (behavioral_keywords().count(tok_.text))
                Lexer::fail(tok_.line, tok_.col,
                            "behavioral construct '" + tok_.text + "' is not supported");
            if (tok_.text == "input" || tok_.text == "output" || tok_.text == "wire") {
                parse_decl(n, declared);
            } else {
                parse_instantiation(n);
            }
        }
        consume();  // endmodule

        for (const std::string& p : header_ports) {
            if (!port_direction_.count(p))
                throw_validation("verilog: module port '" + p +
                                 "' has no input/output declaration");
        }
        for (const auto& [name, dir] : port_direction_) {
            (void)dir;
            bool in_header = false;
            for (const std::string& p : header_ports) in_header |= (p == name);
            if (!in_header)
                throw_validation("verilog: '" + name + "' declared as port but missing from the module port list");
        }
        // keep header order for ports
        for (const std::string& p : header_ports) {
            if (port_direction_.at(p) == 'i')
                n.primary_inputs.push_back(p);
            else
                n.primary_outputs.push_back(p);
        }
        validate_netlist(n);
        return n;
    }

private:
    void parse_decl(Netlist& n, std::unordered_set<std::string>& declared) {
        std::string kw = tok_.text;
        consume();
        for (;;) {
            Token name_tok = tok_;
            std::string name = expect_ident("net name");
            if (!declared.insert(name).second)
                Lexer::fail(name_tok.line, name_tok.col, "net '" + name + "' declared twice");
            n.nets.push_back(name);
            if (kw == "input") port_direction_[name] = 'i';
            if (kw == "output") port_direction_[name] = 'o';
            if (is_punct(",")) {
                consume();
                continue;
            }
            break;
        }
        expect_punct(";");
    }

    void parse_instantiation(Netlist& n) {
        Token kind_tok = tok_;
        std::string kind_name = expect_ident("cell kind");
        int kind_index = lib_->index_of(kind_name);
        if (kind_index < 0)
            Lexer::fail(kind_tok.line, kind_tok.col,
                        "cell kind '" + kind_name + "' is not in the library");
        const CellKind& kind = lib_->kind(kind_index);
        if (kind.category == CellCategory::InputPort || kind.category == CellCategory::OutputPort)
            Lexer::fail(kind_tok.line, kind_tok.col, "port kinds cannot be instantiated");

        Instance inst;
        inst.kind = kind_index;
        inst.id = expect_ident("instance name");
        inst.inputs.assign(static_cast<size_t>(kind.input_count), "");
        expect_punct("(");
        bool have_output = false;
        if (!is_punct(")")) {
            for (;;) {
                expect_punct(".");
                Token port_tok = tok_;
                std::string port = expect_ident("port name");
                expect_punct("(");
                std::string net = expect_ident("net name");
                expect_punct(")");
                if (port == cell_output_port_name(kind)) {
                    if (have_output)
                        Lexer::fail(port_tok.line, port_tok.col, "output connected twice");
                    inst.output = net;
                    have_output = true;
                } else {
                    int pos = -1;
                    for (int i = 0; i < kind.input_count; ++i)
                        if (port == cell_input_port_name(kind, i)) pos = i;
                    if (pos < 0)
                        Lexer::fail(port_tok.line, port_tok.col,
                                    "kind '" + kind_name + "' has no port '" + port + "'");
                    if (!inst.inputs[static_cast<size_t>(pos)].empty())
                        Lexer::fail(port_tok.line, port_tok.col, "port '" + port + "' connected twice");
                    inst.inputs[static_cast<size_t>(pos)] = net;
                }
                if (is_punct(",")) {
                    consume();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        expect_punct(";");
        if (!have_output)
            Lexer::fail(kind_tok.line, kind_tok.col, "instance '" + inst.id + "' has no output connection");
        n.instances.push_back(std::move(inst));
    }

    bool is_punct(const char* p) const { return tok_.kind == Token::Punct && tok_.text == p; }

    void expect_punct(const char* p) {
        if (!is_punct(p))
            Lexer::fail(tok_.line, tok_.col, "expected '" + std::string(p) + "'");
        consume();
    }

    std::string expect_ident(const char* what) {
        if (tok_.kind != Token::Ident)
            Lexer::fail(tok_.line, tok_.col, std::string("expected ") + what);
        std::string text = tok_.text;
        consume();
        return text;
    }

    void expect_keyword(const char* kw) {
        if (tok_.kind != Token::Ident || tok_.text != kw)
            Lexer::fail(tok_.line, tok_.col, "expected '" + std::string(kw) + "'");
        consume();
    }

    void consume() { tok_ = lexer_.next(); }

    Lexer lexer_;
    LibraryPtr lib_;
    Token tok_;
    std::unordered_map<std::string, char> port_direction_;
};

bool is_plain_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '$') return false;
    return !behavioral_keywords().count(s) && s != "module" && s != "endmodule" &&
           s != "input" && s != "output" && s != "wire";
}

std::string quote_ident(const std::string& s) {
    if (is_plain_ident(s)) return s;
    return "\\" + s + " ";
}

}  // namespace

Netlist parse_verilog_subset(const std::string& text, LibraryPtr lib) {
    if (!lib) throw_validation("verilog parser requires a cell library");
    Parser parser(text, std::move(lib));
    return parser.parse();
}

std::string emit_verilog(const Netlist& n) {
    std::ostringstream out;
    out << "module " << quote_ident(n.name) << " (";
    bool first = true;
    for (const std::string& p : n.primary_inputs) {
        out << (first ? "" : ", ") << quote_ident(p);
        first = false;
    }
    for (const std::string& p : n.primary_outputs) {
        out << (first ? "" : ", ") << quote_ident(p);
        first = false;
    }
    out << ");\n";
    for (const std::string& p : n.primary_inputs) out << "  input " << quote_ident(p) << ";\n";
    for (const std::string& p : n.primary_outputs) out << "  output " << quote_ident(p) << ";\n";
    std::unordered_set<std::string> ports(n.primary_inputs.begin(), n.primary_inputs.end());
    ports.insert(n.primary_outputs.begin(), n.primary_outputs.end());
    for (const std::string& net : n.nets)
        if (!ports.count(net)) out << "  wire " << quote_ident(net) << ";\n";
    for (const Instance& inst : n.instances) {
        const CellKind& kind = n.library->kind(inst.kind);
        out << "  " << kind.name << " " << quote_ident(inst.id) << " (";
        for (int i = 0; i < kind.input_count; ++i) {
            out << "." << cell_input_port_name(kind, i) << "("
                << quote_ident(inst.inputs[static_cast<size_t>(i)]) << "), ";
        }
        out << "." << cell_output_port_name(kind) << "(" << quote_ident(inst.output) << "));\n";
    }
    out << "endmodule\n";
    return out.str();
}

}  // namespace regclass
