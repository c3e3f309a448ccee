//! Surface syntax: lexing, parsing, name resolution and printing.
//!
//! The grammar (`--` starts a line comment, files are UTF-8 `.ltc`):
//!
//! ```text
//! module   := decl*
//! decl     := "def" name level? ":" term ":=" term
//!           | "postulate" name level? ":" term
//!           | "assert_level" name "<=" levelset
//! level    := "^" levelset
//! levelset := "{" id ("," id)* "}" | "{}" | alias
//! term     := "fun" (name level?)+ "=>" term
//!           | "(" name ":" level? term ")" "->" term
//!           | spine level? "->" term
//!           | spine
//! spine    := atom (atom level?)*
//!           | "Eq" level atom atom atom | "J" level atom atom atom
//!           | "absurd" atom atom | eliminator level? atom*
//!           | constructor atom* | typeformer atom*
//! atom     := "(" term ")" | "Type" nat | name | constant
//! ```
//!
//! A `^` annotation binds to the argument atom just before it; after a bare
//! atom or a parenthesised term it annotates the domain of a following `->`.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod resolve;

pub use ast::{
    Binder, BuiltinKw, LevelExpr, SDecl, SDeclKind, STerm, STermKind, Span, SurfaceModule,
};
pub use parser::{parse_module, ParseError};
pub use printer::{print_decl, print_module, print_term};
pub use resolve::{resolve_module, ResolveError};

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in text.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}
