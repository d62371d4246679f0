//! Vandermonde coding over GF(2^16): three symbols, two coded rows, one known
//! symbol at the receiver.
//!
//! ```not_rust
//! cargo run --example vandermonde_codec
//! ```

use std::collections::BTreeMap;

use hybrid_cdc::codec::{decode_vandermonde, encode_vandermonde, Bits, Field, SymbolVector};

fn main() -> hybrid_cdc::Result<()> {
    let field = Field::new(16)?;
    let payloads = ["hello", "coded", "world"];
    let symbols: Vec<SymbolVector> =
        payloads.iter().map(|p| SymbolVector::from_bits(&Bits::from_slice(p.as_bytes()), field.w())).collect();
    let alphas = field.alphas(symbols.len())?;
    let coded = encode_vandermonde(&field, &symbols, 2, &alphas)?;
    for (i, row) in coded.iter().enumerate() {
        println!("row {i}: {:04x?}", row.elems);
    }
    let known = BTreeMap::from([(2, symbols[2].clone())]);
    let decoded = decode_vandermonde(&field, &coded, &alphas, &known)?;
    for s in &decoded {
        let bytes = s.to_bits(field.w()).into_vec();
        println!("decoded: {}", String::from_utf8_lossy(&bytes));
    }
    assert_eq!(decoded, symbols);
    Ok(())
}
