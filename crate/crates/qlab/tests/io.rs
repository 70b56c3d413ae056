use qlab::output::{dump_complex, dump_real, float, pgm, read_dump, Cell, Csv, DUMP_MAGIC};
use qlab_core::{Complex64, Field, Grid};

#[test]
fn real_dump_round_trips() {
    let g = Grid::plane((-1.0, 2.0, 9), (0.5, 1.5, 8)).unwrap();
    let f = Field::from_fn(g, |x, y| x * 3.0 - y).unwrap();
    let bytes = dump_real(&f);
    assert_eq!(&bytes[..8], DUMP_MAGIC);
    assert_eq!(bytes.len(), 64 + 8 * 72);
    let d = read_dump(&bytes).unwrap();
    assert_eq!((d.grid, d.components), (g, 1));
    assert_eq!(d.values, f.values());
}

#[test]
fn complex_dump_interleaves_parts() {
    let g = Grid::line(0.0, 1.0, 9).unwrap();
    let f = Field::from_fn(g, |x, _| Complex64::new(x, -2.0 * x)).unwrap();
    let d = read_dump(&dump_complex(&f)).unwrap();
    assert_eq!((d.grid, d.components), (g, 2));
    assert_eq!(&d.values[2..4], &[0.125, -0.25]);
}

#[test]
fn truncated_or_foreign_dumps_are_rejected() {
    let g = Grid::line(0.0, 1.0, 9).unwrap();
    let bytes = dump_real(&Field::constant(g, 1.0));
    assert!(read_dump(&bytes[..bytes.len() - 1]).is_none());
    let mut other = bytes.clone();
    other[0] = b'X';
    assert!(read_dump(&other).is_none());
}

#[test]
fn pgm_has_binary_header_and_flipped_rows() {
    let g = Grid::plane((0.0, 1.0, 9), (0.0, 1.0, 8)).unwrap();
    let f = Field::from_fn(g, |x, y| if y == 1.0 { 2.0 * x } else { 0.0 }).unwrap();
    let img = pgm(&f, 2.0);
    let header = b"P5\n9 8\n255\n";
    assert_eq!(&img[..header.len()], header);
    let pixels = &img[header.len()..];
    assert_eq!(pixels.len(), 72);
    // Top row is the largest y.
    assert_eq!(&pixels[..9], &[0, 32, 64, 96, 128, 159, 191, 223, 255]);
    assert!(pixels[9..].iter().all(|&p| p == 0));
}

#[test]
fn csv_uses_fixed_float_format() {
    let mut c = Csv::new(&["a", "b"]);
    c.row(&[Cell::F(0.1), Cell::I(-3)]);
    c.row(&[Cell::F(-2.5e-300), Cell::I(0)]);
    let text = String::from_utf8(c.into_bytes()).unwrap();
    assert_eq!(text, "a,b\n1.0000000000000001e-1,-3\n-2.5000000000000000e-300,0\n");
    assert_eq!(float(0.1).parse::<f64>().unwrap(), 0.1);
}
